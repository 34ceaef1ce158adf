#include "app.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "gwct/codec.hpp"
#include "gwct/error.hpp"
#include "gwct/image_io.hpp"
#include "gwct/pipeline.hpp"
#include "gwct/stylemodel.hpp"
#include "options.hpp"
#include "report.hpp"

namespace gwct::cli {

namespace fs = std::filesystem;

namespace {

// Carries the exit status and the one-line reason out of a command.
struct Exit {
  int status;
  std::string line;
};

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

std::string error_line(std::string_view code, std::string_view message) {
  return "error: " + std::string(code) + ": " + one_line(std::string(message));
}

template <typename F>
decltype(auto) stage(int status, F&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Exit{status, error_line(to_string(e.code()), e.what())};
  } catch (const std::bad_alloc&) {
    throw Exit{status, error_line("OutOfMemory", "allocation failed")};
  } catch (const std::exception& e) {
    throw Exit{status, error_line(status == kExitValidation ? "InvalidArgument" : "Internal",
                                  e.what())};
  }
}

int default_workers() {
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

struct CodecArgs {
  std::string kind = "analytic";
  std::string weights;

  void add_to(CLI::App& app) {
    app.add_option("--codec", kind, "Feature codec")
        ->check(CLI::IsMember({"analytic", "neural"}))
        ->capture_default_str();
    app.add_option("--codec-weights", weights, "GWCTW1 weight file for the neural codec");
  }

  std::unique_ptr<Codec> make() const {
    if (kind == "neural" && weights.empty()) {
      throw Error(ErrorCode::CodecNotReady, "--codec neural needs --codec-weights");
    }
    return make_codec(kind, weights);
  }
};

/// Files named directly plus the PNGs of named directories, in order.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& entries,
                                    std::string_view what) {
  std::vector<fs::path> out;
  for (const auto& e : entries) {
    const fs::path p(e);
    if (fs::is_directory(p)) {
      const auto files = list_png_files(p);
      if (files.empty()) {
        throw Error(ErrorCode::IoError, std::string(what) + " directory has no PNG files: " + e);
      }
      out.insert(out.end(), files.begin(), files.end());
    } else if (fs::is_regular_file(p)) {
      out.push_back(p);
    } else {
      throw Error(ErrorCode::IoError, std::string(what) + " not found: " + e);
    }
  }
  return out;
}

ClassTable load_class_table(const std::string& path) {
  return path.empty() ? ClassTable{} : ClassTable::load(path);
}

// ---- build-style -----------------------------------------------------------

struct BuildArgs {
  std::vector<std::string> images;
  std::vector<std::string> masks;
  std::string classes;
  std::string out;
  int depth = kDefaultDepth;
  std::string rank = "adaptive";
  std::uint64_t seed = 0;
  int min_pixels = 16;
  int max_iters = 500;
  double tol = 1e-8;
  int workers = default_workers();
  CodecArgs codec;
};

void add_build(CLI::App& app, BuildArgs& a) {
  app.add_option("--images", a.images, "Style images (PNG files or directories)")
      ->required()
      ->delimiter(',');
  app.add_option("--masks", a.masks, "Label masks paired with --images, in the same order")
      ->required()
      ->delimiter(',');
  app.add_option("--classes", a.classes, "Class table sidecar (index:name per line)");
  app.add_option("--out,--output", a.out, "Model file to write")->required();
  app.add_option("--depth", a.depth, "Deepest codec level to model")
      ->check(CLI::Range(1, kNumLevels))
      ->capture_default_str();
  app.add_option("--rank", a.rank, "CP rank: adaptive, full or an integer")->capture_default_str();
  app.add_option("--seed", a.seed, "ALS initialization seed")->capture_default_str();
  app.add_option("--min-pixels", a.min_pixels,
                 "Minimum class cells at feature resolution for an image to join a class stack")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--max-iters", a.max_iters, "ALS iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--tol", a.tol, "ALS relative fit change threshold")->capture_default_str();
  app.add_option("--workers", a.workers, "Worker threads")->check(CLI::PositiveNumber);
  a.codec.add_to(app);
}

void print_summary(std::ostream& out, const StyleModel& m, const std::string& path) {
  out << "model " << path << ": " << m.n_styles << " styles, " << m.n_classes
      << " classes, depth " << m.depth << ", codec " << m.codec_id << ", rank "
      << m.rank_policy.to_string() << ", seed " << m.seed << '\n';
  for (auto it = m.levels.rbegin(); it != m.levels.rend(); ++it) {
    out << "level " << it->level << " (" << it->channels << " channels)\n";
    for (std::size_t c = 0; c < it->classes.size(); ++c) {
      const ClassEntry& e = it->classes[c];
      out << "  class " << c;
      if (c < m.class_names.size() && !m.class_names[c].empty()) out << ' ' << m.class_names[c];
      if (!e.present) {
        out << ": absent\n";
        continue;
      }
      std::ostringstream err;
      err << std::setprecision(3) << std::scientific << e.fit_error;
      out << ": images " << e.participants.size() << '/' << m.n_styles << ", rank "
          << e.factors.rank() << ", fit error " << err.str() << ", iterations " << e.iterations
          << '\n';
    }
  }
}

int cmd_build_style(const BuildArgs& a, std::ostream& out) {
  struct Job {
    std::unique_ptr<Codec> codec;
    std::vector<ImageTensor> images;
    std::vector<LabelMask> masks;
    BuildOptions options;
  };
  Job job = stage(kExitValidation, [&] {
    Job j;
    const auto image_paths = expand_inputs(a.images, "style image");
    const auto mask_paths = expand_inputs(a.masks, "mask file");
    if (image_paths.size() != mask_paths.size()) {
      throw Error(ErrorCode::ShapeMismatch, std::to_string(image_paths.size()) +
                                                " style images but " +
                                                std::to_string(mask_paths.size()) + " masks");
    }
    j.codec = a.codec.make();
    j.options.depth = a.depth;
    j.options.rank_policy = RankPolicy::parse(a.rank);
    j.options.seed = a.seed;
    j.options.min_pixels = a.min_pixels;
    j.options.max_iters = a.max_iters;
    j.options.tol = a.tol;
    j.options.workers = a.workers;
    const ClassTable table = load_class_table(a.classes);
    int max_label = -1;
    for (std::size_t i = 0; i < image_paths.size(); ++i) {
      j.images.push_back(read_image_png(image_paths[i]));
      j.masks.push_back(read_mask_png(mask_paths[i]));
      if (j.images.back().size() != ImageSize{j.masks.back().height, j.masks.back().width}) {
        throw Error(ErrorCode::ShapeMismatch, "mask " + mask_paths[i].string() +
                                                  " does not match the size of " +
                                                  image_paths[i].string());
      }
      max_label = std::max<int>(max_label, j.masks.back().max_label());
    }
    if (!table.empty()) {
      if (max_label >= table.size()) {
        throw Error(ErrorCode::InvalidArgument, "mask label " + std::to_string(max_label) +
                                                    " is not in the class table " + a.classes);
      }
      j.options.num_classes = table.size();
      j.options.class_names.resize(static_cast<std::size_t>(table.size()));
      for (const auto& [idx, name] : table.entries()) {
        j.options.class_names[static_cast<std::size_t>(idx)] = name;
      }
    }
    return j;
  });
  stage(kExitCompute, [&] {
    const StyleModel model = build_style_model(job.images, job.masks, *job.codec, job.options);
    save_model(model, a.out);
    print_summary(out, model, a.out);
  });
  return kExitOk;
}

// ---- shared stylization flags ---------------------------------------------

struct BlendArgs {
  std::string model;
  std::string classes;
  std::optional<int> depth;
  std::string alpha = "0.6";
  std::string weights = "by-count";
  std::string pass_through;
  double eps = kDefaultWhiteningEps;
  int workers = default_workers();
  CodecArgs codec;

  void add_to(CLI::App& app) {
    app.add_option("--model", model, "Style model file")->required();
    app.add_option("--classes", classes, "Class table sidecar for naming classes");
    app.add_option("--depth", depth, "First level of the cascade (default: min(4, model depth))")
        ->check(CLI::Range(1, kNumLevels));
    app.add_option("--alpha", alpha, "Blend: a scalar, class=value pairs, or both")
        ->capture_default_str();
    app.add_option("--weights", weights,
                   "Style mix: by-count, uniform or one weight per style (normalized)")
        ->capture_default_str();
    app.add_option("--pass-through", pass_through, "Classes left unstylized");
    app.add_option("--eps", eps, "Relative eigenvalue floor for whitening")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    codec.add_to(app);
  }
};

struct Prepared {
  StyleModel model;
  std::unique_ptr<Codec> codec;
  BlendSpec spec;
};

Prepared prepare_blend(const BlendArgs& a) {
  Prepared p;
  p.model = load_model(a.model);
  p.codec = a.codec.make();
  if (p.model.codec_id != p.codec->id()) {
    throw Error(ErrorCode::InvalidArgument, "model " + a.model + " was built with codec '" +
                                                p.model.codec_id + "', not '" + p.codec->id() +
                                                "'");
  }
  const ClassResolver classes(p.model.class_names, load_class_table(a.classes),
                              p.model.n_classes);
  const AlphaSpec alpha = parse_alpha(a.alpha, classes);
  if (alpha.global) p.spec.alpha = *alpha.global;
  p.spec.class_alpha = alpha.per_class;
  p.spec.mix = parse_weights(a.weights, p.model.n_styles);
  for (int cls : parse_class_list(a.pass_through, classes)) p.spec.pass_through.insert(cls);
  p.spec.depth = a.depth.value_or(std::min(kDefaultDepth, p.model.depth));
  p.spec.eps = a.eps;
  p.spec.validate(p.model);
  return p;
}

// ---- stylize -----------------------------------------------------------------

struct StylizeArgs {
  BlendArgs blend;
  std::string input;
  std::string mask;
  std::string out;
  std::string report;
};

void add_stylize(CLI::App& app, StylizeArgs& a) {
  app.add_option("--input,--images", a.input, "Content PNG or a directory of numbered frames")
      ->required();
  app.add_option("--mask,--masks", a.mask,
                 "Content mask PNG, or a directory with one mask per frame")
      ->required();
  app.add_option("--out,--output", a.out, "Output PNG, or a directory for frame sequences")
      ->required();
  app.add_option("--report", a.report, "JSON-lines report file ('-' for stdout)");
  a.blend.add_to(app);
}

int cmd_stylize(const StylizeArgs& a, std::ostream& out, std::ostream& err) {
  struct Job {
    Prepared prep;
    std::vector<fs::path> inputs;
    std::vector<fs::path> masks;  // one entry shared by all frames, or one per frame
    std::vector<fs::path> outputs;
    std::unique_ptr<std::ofstream> report_file;
  };
  Job job = stage(kExitValidation, [&] {
    Job j;
    j.prep = prepare_blend(a.blend);
    const bool sequence = fs::is_directory(a.input);
    j.inputs = expand_inputs({a.input}, "content image");
    j.masks = expand_inputs({a.mask}, "mask file");
    if (j.masks.size() != 1 && j.masks.size() != j.inputs.size()) {
      throw Error(ErrorCode::ShapeMismatch, std::to_string(j.inputs.size()) + " frames but " +
                                                std::to_string(j.masks.size()) + " masks in " +
                                                a.mask);
    }
    if (sequence) {
      fs::create_directories(a.out);
      for (const auto& in : j.inputs) j.outputs.push_back(fs::path(a.out) / in.filename());
    } else {
      j.outputs.push_back(a.out);
    }
    if (!a.report.empty() && a.report != "-") {
      j.report_file = std::make_unique<std::ofstream>(a.report);
      if (!*j.report_file) throw Error(ErrorCode::IoError, "cannot write report " + a.report);
    }
    return j;
  });

  std::ostream* report_stream = a.report.empty() ? nullptr
                                : a.report == "-" ? &out
                                                  : job.report_file.get();
  ReportWriter report(report_stream);
  SequenceOptions opts;
  opts.workers = a.blend.workers;
  const auto start = std::chrono::steady_clock::now();
  const SequenceSummary summary = stage(kExitCompute, [&] {
    std::size_t write_failures = 0;
    auto s = stylize_sequence(
        job.inputs.size(),
        [&](std::size_t i) {
          Frame f;
          f.image = read_image_png(job.inputs[i]);
          f.mask = read_mask_png(job.masks.size() == 1 ? job.masks[0] : job.masks[i]);
          return f;
        },
        [&](FrameResult&& r) {
          if (r.image) {
            try {
              write_image_png(job.outputs[r.index], *r.image);
            } catch (const Error& e) {
              r.image.reset();
              r.error_code = e.code();
              r.error = e.what();
              ++write_failures;
            }
          }
          if (!r.image) {
            err << error_line(to_string(*r.error_code),
                              "frame " + std::to_string(r.index) + " (" +
                                  job.inputs[r.index].string() + "): " + r.error)
                << '\n';
          }
          report.frame(r, job.inputs[r.index].string(), job.prep.model);
        },
        job.prep.model, *job.prep.codec, job.prep.spec, opts);
    s.failed += write_failures;
    return s;
  });
  report.summary(summary, std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start)
                              .count());
  return summary.failed == 0 ? kExitOk : kExitCompute;
}

// ---- grid --------------------------------------------------------------------

struct GridArgs {
  BlendArgs blend;
  std::string input;
  std::string mask;
  std::string out;
  std::string manifest;
  int k = 5;
};

void add_grid(CLI::App& app, GridArgs& a) {
  app.add_option("--input,--images", a.input, "Content PNG")->required();
  app.add_option("--mask,--masks", a.mask, "Content mask PNG")->required();
  app.add_option("--out,--output", a.out, "Grid PNG to write")->required();
  app.add_option("--manifest", a.manifest, "Per-cell weight manifest (default: <out>.json)");
  app.add_option("--grid", a.k, "Cells per side")->check(CLI::Range(2, 64))->capture_default_str();
  a.blend.add_to(app);
}

int cmd_grid(const GridArgs& a, std::ostream& out) {
  struct Job {
    Prepared prep;
    ImageTensor content;
    LabelMask mask;
  };
  Job job = stage(kExitValidation, [&] {
    Job j;
    j.prep = prepare_blend(a.blend);
    if (j.prep.model.n_styles != 4) {
      throw Error(ErrorCode::GridRequiresFourStyles,
                  "model " + a.blend.model + " has " + std::to_string(j.prep.model.n_styles) +
                      " styles; the grid needs 4");
    }
    j.content = read_image_png(a.input);
    j.mask = read_mask_png(a.mask);
    if (j.content.size() != ImageSize{j.mask.height, j.mask.width}) {
      throw Error(ErrorCode::ShapeMismatch, "mask " + a.mask + " does not match " + a.input);
    }
    return j;
  });
  const std::string manifest_path = a.manifest.empty() ? a.out + ".json" : a.manifest;
  stage(kExitCompute, [&] {
    const auto cells = interpolation_grid(job.content, job.mask, job.prep.model,
                                          *job.prep.codec, a.k, job.prep.spec, a.blend.workers);
    write_image_png(a.out, compose_grid(cells, a.k));
    nlohmann::json m = {{"grid", a.k},
                        {"cell_height", job.content.height},
                        {"cell_width", job.content.width},
                        {"model", a.blend.model},
                        {"cells", nlohmann::json::array()}};
    for (const auto& c : cells) {
      m["cells"].push_back({{"row", c.row},
                            {"col", c.col},
                            {"u", c.u},
                            {"v", c.v},
                            {"weights", std::vector<double>(c.weights.values().begin(),
                                                            c.weights.values().end())}});
    }
    std::ofstream f(manifest_path);
    f << m.dump(2) << '\n';
    if (!f) throw Error(ErrorCode::IoError, "cannot write manifest " + manifest_path);
  });
  out << "grid " << a.k << 'x' << a.k << " written to " << a.out << ", manifest "
      << manifest_path << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  try {
    std::vector<std::string> args = raw_args;
    // --config is resolved before parsing so that flags can override it.
    for (std::size_t i = 1; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) {
        path = args[i + 1];
        args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      } else if (args[i].rfind("--config=", 0) == 0) {
        path = args[i].substr(9);
        args.erase(args.begin() + static_cast<long>(i));
      } else {
        continue;
      }
      args = merge_config(args, stage(kExitValidation, [&] { return load_config(path); }));
      break;
    }

    CLI::App app{"Multi-style, label-aware whitening-coloring style transfer", "gwct"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");
    app.footer("Every subcommand also accepts --config FILE with key=value lines named after "
               "its flags.\nExit codes: 0 success, 2 invalid input, 3 computation failure.");

    BuildArgs build;
    add_build(*app.add_subcommand("build-style", "Build a style model from images and masks"),
              build);
    StylizeArgs stylize;
    add_stylize(*app.add_subcommand("stylize", "Stylize an image or a directory of frames"),
                stylize);
    GridArgs grid;
    add_grid(*app.add_subcommand("grid", "Render a k x k interpolation grid over four styles"),
             grid);
    for (auto* sub : app.get_subcommands({})) {
      sub->add_option("--config", "key=value file with defaults for these flags");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
      err << error_line("InvalidArgument", e.what()) << '\n';
      return kExitValidation;
    }

    if (app.got_subcommand("build-style")) return cmd_build_style(build, out);
    if (app.got_subcommand("stylize")) return cmd_stylize(stylize, out, err);
    return cmd_grid(grid, out);
  } catch (const Exit& e) {
    err << e.line << '\n';
    return e.status;
  }
}

}  // namespace gwct::cli
