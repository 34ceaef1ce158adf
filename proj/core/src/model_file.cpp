#include <string>
#include <string_view>

#include "gwct/binary_io.hpp"
#include "gwct/error.hpp"
#include "gwct/stylemodel.hpp"

namespace gwct {

namespace {

constexpr std::string_view kMagic = "GWCTM1";
constexpr std::uint16_t kVersion = 1;
constexpr std::string_view kMetaTag = "META";
constexpr std::string_view kCountsTag = "CNTS";
constexpr std::string_view kLevelTag = "LEVL";

void put_matrix(io::ByteWriter& w, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.f64(m(r, c));
  }
}

Eigen::MatrixXd get_matrix(io::ByteReader& r, Eigen::Index rows, Eigen::Index cols) {
  if (static_cast<std::size_t>(rows * cols) > r.remaining() / 8) {
    throw Error(ErrorCode::FormatError, "matrix payload truncated");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = r.f64();
  }
  return m;
}

void put_section(io::ByteWriter& out, std::string_view tag, const io::ByteWriter& payload) {
  out.raw(tag);
  out.u64(payload.buffer().size());
  out.bytes(payload.buffer());
  out.u32(io::crc32(payload.buffer()));
}

io::ByteWriter meta_section(const StyleModel& m) {
  io::ByteWriter w;
  w.u32(static_cast<std::uint32_t>(m.n_styles));
  w.u32(static_cast<std::uint32_t>(m.n_classes));
  w.u32(static_cast<std::uint32_t>(m.depth));
  w.str(m.codec_id);
  w.u64(m.seed);
  w.u8(static_cast<std::uint8_t>(m.rank_policy.kind()));
  w.u32(static_cast<std::uint32_t>(m.rank_policy.fixed_rank()));
  w.u32(static_cast<std::uint32_t>(m.min_pixels));
  w.u32(static_cast<std::uint32_t>(m.max_iters));
  w.f64(m.tol);
  w.u32(static_cast<std::uint32_t>(m.class_names.size()));
  for (const auto& n : m.class_names) w.str(n);
  return w;
}

io::ByteWriter level_section(const LevelEntry& level) {
  io::ByteWriter w;
  w.u32(static_cast<std::uint32_t>(level.level));
  w.u32(static_cast<std::uint32_t>(level.channels));
  w.u32(static_cast<std::uint32_t>(level.classes.size()));
  for (const auto& ce : level.classes) {
    w.u8(ce.present ? 1 : 0);
    if (!ce.present) continue;
    w.u32(static_cast<std::uint32_t>(ce.participants.size()));
    for (int p : ce.participants) w.u32(static_cast<std::uint32_t>(p));
    for (auto cells : ce.participant_cells) w.u64(cells);
    w.u32(static_cast<std::uint32_t>(ce.factors.rank()));
    w.u32(static_cast<std::uint32_t>(ce.iterations));
    w.f64(ce.fit_error);
    put_matrix(w, ce.means);
    put_matrix(w, ce.factors.styles);
    put_matrix(w, ce.factors.rows);
    put_matrix(w, ce.factors.cols);
  }
  return w;
}

void read_meta(io::ByteReader& r, StyleModel& m) {
  m.n_styles = static_cast<int>(r.u32());
  m.n_classes = static_cast<int>(r.u32());
  m.depth = static_cast<int>(r.u32());
  m.codec_id = r.str();
  m.seed = r.u64();
  const auto kind = r.u8();
  const auto fixed = static_cast<int>(r.u32());
  switch (static_cast<RankPolicy::Kind>(kind)) {
    case RankPolicy::Kind::Adaptive: m.rank_policy = RankPolicy::adaptive(); break;
    case RankPolicy::Kind::Full: m.rank_policy = RankPolicy::full(); break;
    case RankPolicy::Kind::Fixed: m.rank_policy = RankPolicy::fixed(fixed); break;
    default: throw Error(ErrorCode::FormatError, "unknown rank policy " + std::to_string(kind));
  }
  m.min_pixels = static_cast<int>(r.u32());
  m.max_iters = static_cast<int>(r.u32());
  m.tol = r.f64();
  const auto names = r.u32();
  if (names > r.remaining()) throw Error(ErrorCode::FormatError, "class name table truncated");
  m.class_names.resize(names);
  for (auto& n : m.class_names) n = r.str();
  if (m.depth < 1 || m.depth > kNumLevels) {
    throw Error(ErrorCode::FormatError, "model depth " + std::to_string(m.depth) + " invalid");
  }
}

void read_counts(io::ByteReader& r, StyleModel& m) {
  const auto images = static_cast<int>(r.u32());
  const auto classes = static_cast<int>(r.u32());
  if (images != m.n_styles || classes != m.n_classes) {
    throw Error(ErrorCode::FormatError, "count table shape disagrees with metadata");
  }
  m.counts = ClassCountTable(images, classes);
  for (auto& c : m.counts.counts) c = r.u64();
}

LevelEntry read_level(io::ByteReader& r, const StyleModel& m) {
  LevelEntry level;
  level.level = static_cast<int>(r.u32());
  level.channels = static_cast<int>(r.u32());
  const auto classes = r.u32();
  if (static_cast<int>(classes) != m.n_classes) {
    throw Error(ErrorCode::FormatError, "level class count disagrees with metadata");
  }
  level.classes.resize(classes);
  const Eigen::Index c = level.channels;
  for (auto& ce : level.classes) {
    ce.present = r.u8() != 0;
    if (!ce.present) continue;
    const auto n = r.u32();
    if (n == 0 || static_cast<int>(n) > m.n_styles) {
      throw Error(ErrorCode::FormatError, "class entry has invalid participant count");
    }
    ce.participants.resize(n);
    for (auto& p : ce.participants) {
      p = static_cast<int>(r.u32());
      if (p >= m.n_styles) throw Error(ErrorCode::FormatError, "participant index out of range");
    }
    ce.participant_cells.resize(n);
    for (auto& cells : ce.participant_cells) cells = r.u64();
    const Eigen::Index rank = r.u32();
    ce.iterations = static_cast<int>(r.u32());
    ce.fit_error = r.f64();
    ce.means = get_matrix(r, n, c);
    ce.factors.styles = get_matrix(r, n, rank);
    ce.factors.rows = get_matrix(r, c, rank);
    ce.factors.cols = get_matrix(r, c, rank);
  }
  return level;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const StyleModel& model) {
  io::ByteWriter out;
  out.raw(kMagic);
  out.u16(kVersion);
  out.u32(static_cast<std::uint32_t>(2 + model.levels.size()));
  put_section(out, kMetaTag, meta_section(model));
  io::ByteWriter counts;
  counts.u32(static_cast<std::uint32_t>(model.counts.n_images));
  counts.u32(static_cast<std::uint32_t>(model.counts.n_classes));
  for (auto c : model.counts.counts) counts.u64(c);
  put_section(out, kCountsTag, counts);
  for (const auto& level : model.levels) put_section(out, kLevelTag, level_section(level));
  return out.take();
}

StyleModel parse_model(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  if (r.remaining() < kMagic.size() || r.raw(kMagic.size()) != kMagic) {
    throw Error(ErrorCode::FormatError, "not a GWCTM1 style model (bad magic)");
  }
  const auto version = r.u16();
  if (version != kVersion) {
    throw Error(ErrorCode::FormatError, "unsupported style model version " + std::to_string(version));
  }
  const auto sections = r.u32();
  StyleModel model;
  bool have_meta = false;
  bool have_counts = false;
  for (std::uint32_t s = 0; s < sections; ++s) {
    const std::string tag = r.raw(4);
    const auto len = r.u64();
    if (len > r.remaining()) {
      throw Error(ErrorCode::FormatError, "section '" + tag + "' is truncated");
    }
    const auto payload = r.bytes(static_cast<std::size_t>(len));
    const auto crc = r.u32();
    if (crc != io::crc32(payload)) {
      throw Error(ErrorCode::IntegrityError,
                  "checksum mismatch in section " + std::to_string(s) + " ('" + tag + "')");
    }
    io::ByteReader pr(payload);
    if (tag == kMetaTag) {
      read_meta(pr, model);
      have_meta = true;
    } else if (tag == kCountsTag) {
      if (!have_meta) throw Error(ErrorCode::FormatError, "count table precedes metadata");
      read_counts(pr, model);
      have_counts = true;
    } else if (tag == kLevelTag) {
      if (!have_meta) throw Error(ErrorCode::FormatError, "level precedes metadata");
      model.levels.push_back(read_level(pr, model));
      if (model.levels.back().level != static_cast<int>(model.levels.size())) {
        throw Error(ErrorCode::FormatError, "levels out of order");
      }
    } else {
      throw Error(ErrorCode::FormatError, "unknown section tag '" + tag + "'");
    }
    if (!pr.done()) {
      throw Error(ErrorCode::FormatError, "section '" + tag + "' has trailing bytes");
    }
  }
  if (!r.done()) throw Error(ErrorCode::FormatError, "trailing bytes after last section");
  if (!have_meta || !have_counts) {
    throw Error(ErrorCode::FormatError, "style model lacks metadata or count table");
  }
  if (static_cast<int>(model.levels.size()) != model.depth) {
    throw Error(ErrorCode::FormatError, "style model has " + std::to_string(model.levels.size()) +
                                            " levels for depth " + std::to_string(model.depth));
  }
  return model;
}

void save_model(const StyleModel& model, const std::filesystem::path& path) {
  io::write_file(path, serialize_model(model));
}

StyleModel load_model(const std::filesystem::path& path) {
  return parse_model(io::read_file(path));
}

}  // namespace gwct
