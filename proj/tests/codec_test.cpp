#include "gwct/codec.hpp"

#include <fstream>

#include <gtest/gtest.h>

#include "gwct/binary_io.hpp"
#include "gwct/error.hpp"
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

TEST(AnalyticCodec, LevelSpecs) {
  AnalyticCodec codec;
  const int channels[] = {3, 12, 48, 192, 768};
  for (int level = 1; level <= 5; ++level) {
    const auto s = codec.level_spec(level);
    EXPECT_EQ(s.channels, channels[level - 1]);
    EXPECT_EQ(s.spatial_divisor, 1 << (level - 1));
  }
  EXPECT_EQ(code_of([&] { codec.level_spec(6); }), ErrorCode::LevelMismatch);
}

TEST(AnalyticCodec, LevelOneKeepsResolution) {
  AnalyticCodec codec;
  const auto f = codec.encode(random_image(64, 64, 1), 1);
  EXPECT_EQ(f.height, 64);
  EXPECT_EQ(f.width, 64);
  EXPECT_EQ(f.channels(), 3);
}

TEST(AnalyticCodec, ZeroImageRoundTripsToZero) {
  AnalyticCodec codec;
  const ImageTensor zero(32, 32);
  for (int level = 1; level <= 5; ++level) {
    EXPECT_EQ(codec.decode(codec.encode(zero, level), level, zero.size()).pixels.norm(), 0.0);
  }
}

TEST(AnalyticCodec, InvertibleAtEveryLevel) {
  AnalyticCodec codec;
  const std::pair<int, int> sizes[] = {{32, 32}, {64, 64}, {96, 64}, {33, 45}};
  std::uint64_t seed = 10;
  for (auto [h, w] : sizes) {
    const ImageTensor img = random_image(h, w, seed++);
    for (int level = 1; level <= 5; ++level) {
      const FeatureMap f = codec.encode(img, level);
      const int d = 1 << (level - 1);
      EXPECT_EQ(f.channels(), 3 * d * d);
      EXPECT_EQ(f.height, round_up(h, d) / d);
      EXPECT_EQ(f.width, round_up(w, d) / d);
      const ImageTensor back = codec.decode(f, level, img.size());
      ASSERT_EQ(back.size(), img.size());
      EXPECT_LT((back.pixels - img.pixels).cwiseAbs().maxCoeff(), 1e-6)
          << h << "x" << w << " level " << level;
    }
  }
}

TEST(AnalyticCodec, TransformIsOrthonormal) {
  AnalyticCodec codec;
  const ImageTensor img = random_image(32, 32, 3);
  for (int level = 1; level <= 5; ++level) {
    EXPECT_NEAR(codec.encode(img, level).data.norm(), img.pixels.norm(), 1e-9);
  }
}

TEST(AnalyticCodec, WhitenColorOwnStatsRoundTrip) {
  AnalyticCodec codec;
  const ImageTensor img = random_image(64, 64, 4);
  for (int level = 1; level <= 3; ++level) {
    const FeatureMap f = codec.encode(img, level);
    const auto stats = compute_stats(f);
    const FeatureMap styled = color(whiten(f, stats), stats);
    const ImageTensor a = codec.decode(styled, level, img.size());
    const ImageTensor b = codec.decode(f, level, img.size());
    EXPECT_LT((a.pixels - b.pixels).cwiseAbs().maxCoeff(), 1e-4) << "level " << level;
  }
}

TEST(AnalyticCodec, DecodeRejectsWrongChannels) {
  AnalyticCodec codec;
  const FeatureMap f(Eigen::MatrixXd::Zero(5, 16), 4, 4);
  EXPECT_EQ(code_of([&] { codec.decode(f, 2); }), ErrorCode::ShapeMismatch);
}

TEST(AnalyticCodec, DecodeClampsToUnitRange) {
  AnalyticCodec codec;
  FeatureMap f(Eigen::MatrixXd::Constant(3, 4, 2.0), 2, 2);
  f.data(0, 0) = -1.0;
  const ImageTensor img = codec.decode(f, 1);
  EXPECT_EQ(img.pixels.maxCoeff(), 1.0);
  EXPECT_EQ(img.pixels.minCoeff(), 0.0);
}

// Hand-computed: input [[1, 2], [3, 4]], kernel values 1..9 row-major,
// reflection padding gives patches whose dot products are 135, 120, 105, 90.
TEST(ConvNet, HandBuiltThreeByThreeFromWeightFile) {
  TempDir dir("conv");
  WeightFile wf;
  wf.add({"conv.weight", {1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9}});
  wf.add({"conv.bias", {1}, {-100.0f}});
  wf.save(dir / "tiny.gwctw");
  const WeightFile loaded = WeightFile::load(dir / "tiny.gwctw");

  Conv2d conv;
  conv.in_channels = 1;
  conv.out_channels = 1;
  conv.kernel = 3;
  conv.weight = loaded.find("conv.weight")->data;
  conv.bias = loaded.find("conv.bias")->data;
  ConvNet net;
  net.add_conv(conv);
  Activation in(1, 2, 2);
  in.data = {1, 2, 3, 4};
  const Activation raw = conv.forward(in);
  EXPECT_EQ(raw.data, (std::vector<float>{35, 20, 5, -10}));
  net.add_relu();
  EXPECT_EQ(net.forward(in).data, (std::vector<float>{35, 20, 5, 0}));
}

// Even kernels pad only after: out(0,0) = 1+4+9+16, others by reflection.
TEST(ConvNet, HandBuiltTwoByTwo) {
  Conv2d conv;
  conv.in_channels = 1;
  conv.out_channels = 1;
  conv.kernel = 2;
  conv.weight = {1, 2, 3, 4};
  conv.bias = {0};
  Activation in(1, 2, 2);
  in.data = {1, 2, 3, 4};
  EXPECT_EQ(conv.forward(in).data, (std::vector<float>{30, 28, 22, 20}));
}

TEST(ConvNet, PoolAndUpsample) {
  Activation a(1, 2, 4);
  a.data = {1, 5, 2, 0, 3, 4, -1, 7};
  const Activation p = max_pool2(a);
  EXPECT_EQ(p.data, (std::vector<float>{5, 7}));
  const Activation u = upsample_nearest2(p);
  EXPECT_EQ(u.height, 2);
  EXPECT_EQ(u.width, 4);
  EXPECT_EQ(u.data, (std::vector<float>{5, 5, 7, 7, 5, 5, 7, 7}));
}

TEST(ConvNet, MultiChannelMatchesDirectSum) {
  std::mt19937 gen(2);
  std::uniform_real_distribution<float> u(-1, 1);
  Conv2d conv;
  conv.in_channels = 3;
  conv.out_channels = 2;
  conv.kernel = 3;
  conv.weight.resize(2 * 3 * 9);
  for (auto& v : conv.weight) v = u(gen);
  conv.bias = {0.1f, -0.2f};
  Activation in(3, 5, 6);
  for (auto& v : in.data) v = u(gen);
  const Activation out = conv.forward(in);
  for (int o = 0; o < 2; ++o) {
    for (int y = 0; y < 5; ++y) {
      for (int x = 0; x < 6; ++x) {
        double want = conv.bias[static_cast<std::size_t>(o)];
        for (int c = 0; c < 3; ++c) {
          for (int dy = 0; dy < 3; ++dy) {
            for (int dx = 0; dx < 3; ++dx) {
              want += conv.weight[static_cast<std::size_t>(((o * 3 + c) * 3 + dy) * 3 + dx)] *
                      in.at(c, reflect_index(y + dy - 1, 5), reflect_index(x + dx - 1, 6));
            }
          }
        }
        EXPECT_NEAR(out.at(o, y, x), want, 1e-5);
      }
    }
  }
}

constexpr LevelWidths kSmallWidths = {4, 6, 8, 8, 10};

WeightFile small_random_weights(std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<float> u(-0.3f, 0.3f);
  return make_neural_weights(kSmallWidths, [&](const std::string& name, std::size_t) {
    return name.find("bias") != std::string::npos ? 0.01f : u(gen);
  });
}

TEST(NeuralCodec, InventoryCoversEncoderAndFiveDecoders) {
  const auto inv = neural_tensor_inventory(kVgg19Widths);
  EXPECT_EQ(inv.at("encoder.conv1_1.weight"), (std::vector<std::uint64_t>{64, 3, 3, 3}));
  EXPECT_EQ(inv.at("encoder.conv5_1.weight"), (std::vector<std::uint64_t>{512, 512, 3, 3}));
  EXPECT_EQ(inv.at("encoder.conv0.weight"), (std::vector<std::uint64_t>{3, 3, 1, 1}));
  EXPECT_EQ(inv.at("decoder1.conv1_1.weight"), (std::vector<std::uint64_t>{3, 64, 3, 3}));
  EXPECT_EQ(inv.at("decoder5.conv5_1.weight"), (std::vector<std::uint64_t>{512, 512, 3, 3}));
  EXPECT_EQ(inv.at("decoder4.conv4_1.weight"), (std::vector<std::uint64_t>{256, 512, 3, 3}));
  // conv0 plus 13 encoder convs up to conv5_1; decoders have 1, 3, 5, 9, 13 convs.
  EXPECT_EQ(inv.size(), 2u * (14 + 1 + 3 + 5 + 9 + 13));
}

TEST(NeuralCodec, UnloadedIsNotReady) {
  NeuralCodec codec;
  EXPECT_FALSE(codec.ready());
  EXPECT_EQ(code_of([&] { codec.encode(random_image(8, 8, 1), 1); }), ErrorCode::CodecNotReady);
  EXPECT_EQ(code_of([] { make_codec("neural"); }), ErrorCode::CodecNotReady);
}

TEST(NeuralCodec, ShapesAtEveryLevel) {
  const NeuralCodec codec(small_random_weights(1));
  const ImageTensor img = random_image(32, 32, 2);
  for (int level = 1; level <= 5; ++level) {
    const FeatureMap f = codec.encode(img, level);
    const int d = 1 << (level - 1);
    EXPECT_EQ(f.channels(), kSmallWidths[static_cast<std::size_t>(level - 1)]);
    EXPECT_EQ(f.height, 32 / d);
    EXPECT_EQ(f.width, 32 / d);
    EXPECT_TRUE(f.data.allFinite());
    const ImageTensor back = codec.decode(f, level, img.size());
    EXPECT_EQ(back.size(), img.size());
    EXPECT_TRUE(back.pixels.allFinite());
    EXPECT_GE(back.pixels.minCoeff(), 0.0);
    EXPECT_LE(back.pixels.maxCoeff(), 1.0);
  }
}

TEST(NeuralCodec, OddSizedInputIsPaddedAndCropped) {
  const NeuralCodec codec(small_random_weights(3));
  const ImageTensor img = random_image(21, 30, 4);
  const FeatureMap f = codec.encode(img, 3);
  EXPECT_EQ(f.height, 6);
  EXPECT_EQ(f.width, 8);
  EXPECT_EQ(codec.decode(f, 3, img.size()).size(), img.size());
}

TEST(NeuralCodec, Deterministic) {
  const NeuralCodec a(small_random_weights(5));
  const NeuralCodec b(small_random_weights(5));
  const ImageTensor img = random_image(16, 16, 6);
  EXPECT_TRUE(testing::bitwise_equal(a.encode(img, 3).data, b.encode(img, 3).data));
  const FeatureMap f = a.encode(img, 2);
  EXPECT_TRUE(testing::bitwise_equal(a.decode(f, 2).pixels, b.decode(f, 2).pixels));
  EXPECT_EQ(a.id(), b.id());
  EXPECT_NE(a.id(), NeuralCodec(small_random_weights(6)).id());
}

TEST(NeuralCodec, FullVggWidthsFromFile) {
  TempDir dir("vgg");
  make_neural_weights(kVgg19Widths, [](const std::string&, std::size_t) { return 0.0f; })
      .save(dir / "vgg.gwctw");
  const NeuralCodec codec = NeuralCodec::load_weights(dir / "vgg.gwctw");
  const int want[] = {64, 128, 256, 512, 512};
  for (int level = 1; level <= 5; ++level) {
    EXPECT_EQ(codec.level_spec(level).channels, want[level - 1]);
  }
  EXPECT_EQ(codec.checksums().size(), neural_tensor_inventory(kVgg19Widths).size());
  const FeatureMap f = codec.encode(ImageTensor(256, 256), 5);
  EXPECT_EQ(f.channels(), 512);
  EXPECT_EQ(f.cells(), 16 * 16);
}

TEST(NeuralCodec, MissingTensorIsNamed) {
  WeightFile full = small_random_weights(7);
  WeightFile renamed;
  for (auto t : full.tensors()) {
    if (t.name == "decoder3.conv2_2.weight") t.name = "decoder3.conv2_2.weights";
    renamed.add(std::move(t));
  }
  try {
    NeuralCodec codec(renamed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IncompleteWeights);
    EXPECT_NE(std::string(e.what()).find("decoder3.conv2_2.weight"), std::string::npos);
  }
}

TEST(WeightFile, TruncatedAndBadMagic) {
  TempDir dir("wf");
  const auto bytes = small_random_weights(8).serialize();
  for (std::size_t cut : {std::size_t{3}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
    const std::vector<std::uint8_t> truncated(bytes.begin(), bytes.begin() + static_cast<long>(cut));
    EXPECT_EQ(code_of([&] { WeightFile::parse(truncated); }), ErrorCode::FormatError) << cut;
  }
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_EQ(code_of([&] { WeightFile::parse(bad); }), ErrorCode::FormatError);
  auto version = bytes;
  version[6] = 9;
  EXPECT_EQ(code_of([&] { WeightFile::parse(version); }), ErrorCode::FormatError);
  io::write_file(dir / "cut.gwctw",
                 std::span<const std::uint8_t>(bytes.data(), bytes.size() - 5));
  EXPECT_EQ(code_of([&] { NeuralCodec::load_weights(dir / "cut.gwctw"); }),
            ErrorCode::FormatError);
}

TEST(WeightFile, LayoutIsBitExact) {
  WeightFile wf;
  wf.add({"ab", {2}, {1.0f, -2.0f}});
  const std::vector<std::uint8_t> want = {
      'G', 'W', 'C', 'T', 'W', '1',  // magic
      1, 0,                          // version
      1, 0, 0, 0,                    // tensor count
      2, 0, 0, 0, 'a', 'b',          // name
      1, 0, 0, 0,                    // rank
      2, 0, 0, 0, 0, 0, 0, 0,        // dims
      0x00, 0x00, 0x80, 0x3f,        // 1.0f
      0x00, 0x00, 0x00, 0xc0,        // -2.0f
  };
  EXPECT_EQ(wf.serialize(), want);
}

TEST(WeightFile, RandomContainersRoundTrip) {
  std::mt19937 gen(9);
  for (int trial = 0; trial < 20; ++trial) {
    WeightFile wf;
    const int n = static_cast<int>(gen() % 5);
    for (int k = 0; k < n; ++k) {
      NamedTensor t;
      t.name = "t" + std::to_string(k) + std::string(gen() % 4, 'x');
      const auto rank = gen() % 4;
      std::uint64_t total = 1;
      for (std::uint32_t r = 0; r < rank; ++r) {
        t.shape.push_back(gen() % 4);
        total *= t.shape.back();
      }
      t.data.resize(total);
      for (auto& v : t.data) v = std::bit_cast<float>(static_cast<std::uint32_t>(gen() & 0x7f7fffff));
      wf.add(t);
    }
    const WeightFile back = WeightFile::parse(wf.serialize());
    ASSERT_EQ(back.tensors().size(), wf.tensors().size());
    for (std::size_t k = 0; k < wf.tensors().size(); ++k) {
      EXPECT_EQ(back.tensors()[k].name, wf.tensors()[k].name);
      EXPECT_EQ(back.tensors()[k].shape, wf.tensors()[k].shape);
      EXPECT_EQ(tensor_checksum(back.tensors()[k]), tensor_checksum(wf.tensors()[k]));
    }
  }
}

TEST(WeightFile, DuplicateNamesRejected) {
  WeightFile wf;
  wf.add({"a", {1}, {1.0f}});
  EXPECT_EQ(code_of([&] { wf.add({"a", {1}, {2.0f}}); }), ErrorCode::FormatError);
  EXPECT_EQ(code_of([&] { wf.add({"b", {2}, {2.0f}}); }), ErrorCode::FormatError);
}

}  // namespace
}  // namespace gwct
