#include "gwct/stylemodel.hpp"

#include <gtest/gtest.h>

#include "gwct/binary_io.hpp"
#include "gwct/error.hpp"
#include "gwct/pipeline.hpp"
#include "test_support.hpp"

namespace gwct {
namespace {

using testing::random_image;
using testing::TempDir;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

std::vector<double> vec(const StyleWeights& w) { return {w.values().begin(), w.values().end()}; }

ClassCountTable column(std::vector<std::uint64_t> values) {
  ClassCountTable t(static_cast<int>(values.size()), 1);
  t.counts = std::move(values);
  return t;
}

TEST(ClassWeights, ProportionalToCounts) {
  EXPECT_EQ(vec(class_weights(column({300, 100}), 0)), (std::vector<double>{0.75, 0.25}));
  EXPECT_EQ(vec(class_weights(column({500}), 0)), (std::vector<double>{1.0}));
  EXPECT_EQ(code_of([] { class_weights(column({0, 0}), 0); }), ErrorCode::ClassAbsent);
}

TEST(ClassWeights, RestrictedToParticipants) {
  const auto t = column({0, 30, 10});
  const int part[] = {1, 2};
  EXPECT_EQ(vec(class_weights(t, 0, part)), (std::vector<double>{0.75, 0.25}));
}

TEST(ClassWeights, AlwaysSumToOne) {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 7);
    ClassCountTable t(n, 3);
    for (auto& c : t.counts) c = gen() % 1000;
    t.at(0, trial % 3) += 1;
    const auto w = class_weights(t, trial % 3);
    double sum = 0.0;
    for (double v : w.values()) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_EQ(vec(w), vec(class_weights(t, trial % 3)));
  }
}

TEST(RankPolicy, ParseAndResolve) {
  EXPECT_EQ(RankPolicy::parse("adaptive").rank_for(48, 4), 48);
  EXPECT_EQ(RankPolicy::parse("full").rank_for(12, 4), 48);
  EXPECT_EQ(RankPolicy::parse("full").rank_for(3, 4), 9);
  EXPECT_EQ(RankPolicy::parse("10").rank_for(192, 4), 10);
  EXPECT_EQ(RankPolicy::parse("10").to_string(), "10");
  EXPECT_EQ(code_of([] { RankPolicy::parse("0"); }), ErrorCode::InvalidRank);
  EXPECT_EQ(code_of([] { RankPolicy::parse("ten"); }), ErrorCode::InvalidRank);
}

// Label 3 sits in the bottom-right quadrant, the rest splits left/right.
LabelMask quadrant_mask(int h, int w, bool with_class3) {
  LabelMask m = testing::split_mask(h, w);
  if (with_class3) {
    for (int y = h / 2; y < h; ++y) {
      for (int x = w / 2; x < w; ++x) m.labels[static_cast<std::size_t>(y) * w + x] = 3;
    }
  }
  return m;
}

struct StyleSet {
  std::vector<ImageTensor> images;
  std::vector<LabelMask> masks;
};

StyleSet two_styles() {
  StyleSet s;
  s.images = {random_image(32, 32, 1), random_image(32, 32, 2)};
  s.masks = {quadrant_mask(32, 32, false), quadrant_mask(32, 32, true)};
  return s;
}

TEST(BuildStyleModel, SingleImageMatchesPlainStatistics) {
  AnalyticCodec codec;
  const ImageTensor img = random_image(64, 64, 3);
  const LabelMask mask(64, 64);
  BuildOptions opts;
  opts.depth = 3;
  opts.rank_policy = RankPolicy::full();
  const StyleModel model = build_style_model({&img, 1}, {&mask, 1}, codec, opts);
  ASSERT_EQ(model.levels.size(), 3u);
  for (int level = 1; level <= 3; ++level) {
    const auto stats = compute_stats(codec.encode(img, level));
    const ClassEntry& e = model.entry(level, 0);
    ASSERT_TRUE(e.present);
    EXPECT_EQ(e.participants, (std::vector<int>{0}));
    EXPECT_EQ(e.factors.rank(), stats.cov.rows());
    EXPECT_LT(testing::relative_error(reconstruct_slice(e.factors, 0), stats.cov), 1e-6);
    EXPECT_LT((e.means.row(0).transpose() - stats.mean).norm(), 1e-12);
  }
}

TEST(BuildStyleModel, ClassInOneImageHasOneParticipant) {
  AnalyticCodec codec;
  const StyleSet s = two_styles();
  BuildOptions opts;
  opts.depth = 2;
  const StyleModel model = build_style_model(s.images, s.masks, codec, opts);
  EXPECT_EQ(model.n_classes, 4);
  for (int level = 1; level <= 2; ++level) {
    const ClassEntry& e3 = model.entry(level, 3);
    ASSERT_TRUE(e3.present);
    EXPECT_EQ(e3.participants, (std::vector<int>{1}));
    EXPECT_EQ(e3.factors.n_styles(), 1);
    EXPECT_EQ(model.entry(level, 0).participants, (std::vector<int>{0, 1}));
    EXPECT_FALSE(model.entry(level, 2).present);
    const auto w = resolve_class_weights(model, level, 3, StyleMix::by_count());
    ASSERT_TRUE(w.has_value());
    EXPECT_EQ(vec(*w), (std::vector<double>{1.0}));
  }
  EXPECT_EQ(model.counts.at(0, 3), 0u);
  EXPECT_EQ(model.counts.at(1, 3), 256u);
  for (int j = 0; j < 2; ++j) {
    std::uint64_t row = 0;
    for (int c = 0; c < 4; ++c) row += model.counts.at(j, c);
    EXPECT_EQ(row, 32u * 32u);
  }
}

TEST(BuildStyleModel, SmallRegionsAreExcluded) {
  AnalyticCodec codec;
  const ImageTensor img = random_image(32, 32, 4);
  LabelMask mask(32, 32);
  for (int k = 0; k < 20; ++k) mask.labels[static_cast<std::size_t>(k)] = 1;
  BuildOptions opts;
  opts.depth = 2;
  opts.min_pixels = 16;
  const StyleModel model = build_style_model({&img, 1}, {&mask, 1}, codec, opts);
  EXPECT_TRUE(model.entry(1, 1).present);   // 20 cells
  EXPECT_FALSE(model.entry(2, 1).present);  // 5 cells
  EXPECT_TRUE(model.entry(2, 1).participants.empty());
}

TEST(BuildStyleModel, ImageWithoutClassDoesNotChangeIt) {
  AnalyticCodec codec;
  const StyleSet s = two_styles();
  BuildOptions opts;
  opts.depth = 2;
  const StyleModel both = build_style_model(s.images, s.masks, codec, opts);
  const StyleModel only = build_style_model({&s.images[1], 1}, {&s.masks[1], 1}, codec, opts);
  for (int level = 1; level <= 2; ++level) {
    const auto& a = both.entry(level, 3).factors;
    const auto& b = only.entry(level, 3).factors;
    EXPECT_TRUE(testing::bitwise_equal(a.styles, b.styles));
    EXPECT_TRUE(testing::bitwise_equal(a.rows, b.rows));
    EXPECT_TRUE(testing::bitwise_equal(a.cols, b.cols));
    EXPECT_TRUE(testing::bitwise_equal(both.entry(level, 3).means, only.entry(level, 3).means));
  }
}

TEST(BuildStyleModel, FixedRankStoredAtEveryLevel) {
  AnalyticCodec codec;
  const StyleSet s = two_styles();
  BuildOptions opts;
  opts.depth = 3;
  opts.rank_policy = RankPolicy::fixed(10);
  opts.max_iters = 50;
  const StyleModel model = build_style_model(s.images, s.masks, codec, opts);
  for (const auto& level : model.levels) {
    for (const auto& e : level.classes) {
      if (e.present) EXPECT_EQ(e.factors.rank(), 10);
    }
  }
}

TEST(BuildStyleModel, AdaptiveRankFollowsChannels) {
  AnalyticCodec codec;
  const StyleSet s = two_styles();
  BuildOptions opts;
  opts.depth = 3;
  const StyleModel model = build_style_model(s.images, s.masks, codec, opts);
  for (const auto& level : model.levels) {
    EXPECT_EQ(level.channels, codec.level_spec(level.level).channels);
    EXPECT_EQ(level.classes[0].factors.rank(), level.channels);
  }
}

TEST(BuildStyleModel, DeterministicAcrossRunsAndWorkers) {
  AnalyticCodec codec;
  const StyleSet s = two_styles();
  BuildOptions opts;
  opts.depth = 3;
  opts.seed = 42;
  const auto a = serialize_model(build_style_model(s.images, s.masks, codec, opts));
  opts.workers = 3;
  const auto b = serialize_model(build_style_model(s.images, s.masks, codec, opts));
  EXPECT_EQ(a, b);
  opts.seed = 43;
  EXPECT_NE(a, serialize_model(build_style_model(s.images, s.masks, codec, opts)));
}

TEST(BuildStyleModel, Errors) {
  AnalyticCodec codec;
  const StyleSet s = two_styles();
  EXPECT_EQ(code_of([&] { build_style_model({}, {}, codec, {}); }), ErrorCode::EmptyStyleSet);
  EXPECT_EQ(code_of([&] {
              build_style_model(s.images, std::span<const LabelMask>(s.masks.data(), 1), codec, {});
            }),
            ErrorCode::ShapeMismatch);
  const LabelMask small(16, 16);
  EXPECT_EQ(code_of([&] { build_style_model({&s.images[0], 1}, {&small, 1}, codec, {}); }),
            ErrorCode::ShapeMismatch);
  BuildOptions opts;
  opts.num_classes = 2;
  EXPECT_EQ(code_of([&] { build_style_model(s.images, s.masks, codec, opts); }),
            ErrorCode::InvalidArgument);
}

void expect_models_equal(const StyleModel& a, const StyleModel& b) {
  EXPECT_EQ(a.n_styles, b.n_styles);
  EXPECT_EQ(a.n_classes, b.n_classes);
  EXPECT_EQ(a.depth, b.depth);
  EXPECT_EQ(a.codec_id, b.codec_id);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.rank_policy, b.rank_policy);
  EXPECT_EQ(a.min_pixels, b.min_pixels);
  EXPECT_EQ(a.max_iters, b.max_iters);
  EXPECT_EQ(a.tol, b.tol);
  EXPECT_EQ(a.class_names, b.class_names);
  EXPECT_EQ(a.counts.counts, b.counts.counts);
  ASSERT_EQ(a.levels.size(), b.levels.size());
  for (std::size_t l = 0; l < a.levels.size(); ++l) {
    ASSERT_EQ(a.levels[l].classes.size(), b.levels[l].classes.size());
    EXPECT_EQ(a.levels[l].channels, b.levels[l].channels);
    for (std::size_t c = 0; c < a.levels[l].classes.size(); ++c) {
      const auto& x = a.levels[l].classes[c];
      const auto& y = b.levels[l].classes[c];
      EXPECT_EQ(x.present, y.present);
      EXPECT_EQ(x.participants, y.participants);
      EXPECT_EQ(x.participant_cells, y.participant_cells);
      EXPECT_EQ(x.fit_error, y.fit_error);
      EXPECT_EQ(x.iterations, y.iterations);
      EXPECT_TRUE(testing::bitwise_equal(x.means, y.means));
      EXPECT_TRUE(testing::bitwise_equal(x.factors.styles, y.factors.styles));
      EXPECT_TRUE(testing::bitwise_equal(x.factors.rows, y.factors.rows));
      EXPECT_TRUE(testing::bitwise_equal(x.factors.cols, y.factors.cols));
    }
  }
}

TEST(ModelFile, RoundTripIsBitwise) {
  AnalyticCodec codec;
  const StyleSet s = two_styles();
  BuildOptions opts;
  opts.depth = 3;
  opts.seed = 7;
  opts.class_names = {"bg", "skin", "unused", "tools"};
  const StyleModel model = build_style_model(s.images, s.masks, codec, opts);
  TempDir dir("model");
  save_model(model, dir / "m.gwctm");
  const StyleModel back = load_model(dir / "m.gwctm");
  expect_models_equal(model, back);
  EXPECT_FALSE(back.entry(1, 2).present);
  EXPECT_EQ(serialize_model(back), serialize_model(model));
}

TEST(ModelFile, CorruptionIsDetected) {
  AnalyticCodec codec;
  const StyleSet s = two_styles();
  BuildOptions opts;
  opts.depth = 2;
  const auto bytes = serialize_model(build_style_model(s.images, s.masks, codec, opts));

  auto crc = bytes;
  crc.back() ^= 0x01;
  EXPECT_EQ(code_of([&] { parse_model(crc); }), ErrorCode::IntegrityError);
  auto payload = bytes;
  payload[bytes.size() / 2] ^= 0x40;
  EXPECT_EQ(code_of([&] { parse_model(payload); }), ErrorCode::IntegrityError);
  auto version = bytes;
  version[6] = 2;
  EXPECT_EQ(code_of([&] { parse_model(version); }), ErrorCode::FormatError);
  auto magic = bytes;
  magic[5] = 'W';
  EXPECT_EQ(code_of([&] { parse_model(magic); }), ErrorCode::FormatError);
  const std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 9);
  EXPECT_EQ(code_of([&] { parse_model(cut); }), ErrorCode::FormatError);
  auto extra = bytes;
  extra.push_back(0);
  EXPECT_EQ(code_of([&] { parse_model(extra); }), ErrorCode::FormatError);
}

TEST(DownsampleMask, SamplesBlockCentres) {
  LabelMask m(4, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) m.labels[static_cast<std::size_t>(y * 4 + x)] = static_cast<std::uint16_t>(y * 4 + x);
  }
  const LabelMask d = downsample_mask(m, 2);
  EXPECT_EQ(d.height, 2);
  EXPECT_EQ(d.labels, (std::vector<std::uint16_t>{5, 7, 13, 15}));
  EXPECT_EQ(downsample_mask(m, 1).labels, m.labels);
  const LabelMask odd = downsample_mask(LabelMask(5, 3, 2), 4);
  EXPECT_EQ(odd.height, 2);
  EXPECT_EQ(odd.width, 1);
}

TEST(ClassTable, ParsesSidecar) {
  const auto t = ClassTable::parse("# classes\n0:background\n\n2:iris\n1: skin \n");
  EXPECT_EQ(t.size(), 3);
  EXPECT_EQ(t.index_of("iris"), 2);
  EXPECT_EQ(t.index_of("skin"), 1);
  EXPECT_EQ(t.name_of(0), "background");
  EXPECT_FALSE(t.index_of("tools").has_value());
  EXPECT_EQ(code_of([] { ClassTable::parse("iris\n"); }), ErrorCode::FormatError);
  EXPECT_EQ(code_of([] { ClassTable::parse("0:a\n0:b\n"); }), ErrorCode::FormatError);
}

}  // namespace
}  // namespace gwct
