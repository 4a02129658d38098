#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fplab/datasets.hpp"
#include "fplab/error.hpp"
#include "fplab/spectral.hpp"

namespace fplab {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fplab-datasets-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<double> targets_of(const Dataset& d) {
  return {d.targets.values().begin(), d.targets.values().end()};
}

// ---------------------------------------------------------------------------
// 1-d targets

TEST(Make1d, LinearForty) {
  const auto d = make_1d_target(TargetKind::kLinear, 40, -1, 1);
  ASSERT_EQ(d.size(), 40u);
  for (std::size_t i = 0; i < 40; ++i) {
    EXPECT_NEAR(d.inputs(i, 0), -1 + 2.0 * i / 39, 1e-15);
    EXPECT_EQ(d.targets(i, 0), d.inputs(i, 0));
  }
  ASSERT_TRUE(d.grid);
  EXPECT_EQ(d.grid->count, 40u);
  EXPECT_NEAR(d.grid->spacing, 2.0 / 39, 1e-15);
}

TEST(Make1d, TwoPoints) {
  const auto d = make_1d_target(TargetKind::kLinear, 2, 0, 1);
  EXPECT_EQ(d.inputs(0, 0), 0.0);
  EXPECT_EQ(d.inputs(1, 0), 1.0);
  EXPECT_EQ(targets_of(d), (std::vector<double>{0, 1}));
}

TEST(Make1d, CustomSamplesPassThrough) {
  const std::vector<double> s{3, -1, 4, 1, -5};
  const auto d = make_1d_target(s, -2, 2);
  EXPECT_EQ(targets_of(d), s);
}

TEST(Make1d, LowFrequencyDefault) {
  const auto d = make_1d_target(TargetKind::kLowFrequency, 120, -10, 10);
  for (std::size_t i = 0; i < 120; i += 17) {
    const double x = d.inputs(i, 0);
    EXPECT_NEAR(d.targets(i, 0), std::sin(x) + 0.5 * std::sin(3 * x) + 0.25 * std::sin(5 * x), 1e-14);
  }
}

TEST(Make1d, Preconditions) {
  EXPECT_THROW(make_1d_target(TargetKind::kLinear, 1, 0, 1), InvalidArgument);
  EXPECT_THROW(make_1d_target(TargetKind::kLinear, 5, 1, 1), InvalidArgument);
}

TEST(Make1d, DeterministicGivenProvenance) {
  const auto a = make_1d_target(TargetKind::kLowFrequency, 50, -3, 3);
  const auto b = make_1d_target(TargetKind::kLowFrequency, 50, -3, 3);
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_EQ(a.targets, b.targets);
  EXPECT_EQ(a.provenance, b.provenance);
  EXPECT_FALSE(a.provenance.empty());
}

TEST(DetectGrid, UniformAndNot) {
  Matrix x(4, 1, std::vector<double>{0.0, 0.5, 1.0, 1.5});
  ASSERT_TRUE(detect_uniform_grid(x));
  EXPECT_DOUBLE_EQ(detect_uniform_grid(x)->spacing, 0.5);
  x(2, 0) = 1.1;
  EXPECT_FALSE(detect_uniform_grid(x));
}

// ---------------------------------------------------------------------------
// Flipped spectrum

TEST(Flip, LinearFortyPeaksAtNineteen) {
  const auto g = make_flipped_target(make_1d_target(TargetKind::kLinear, 40, -1, 1));
  const auto s = dft(targets_of(g));
  std::size_t arg = 1;
  for (std::size_t k = 1; k <= 20; ++k) {
    if (std::abs(s.coefficients[k]) > std::abs(s.coefficients[arg])) arg = k;
  }
  EXPECT_EQ(arg, 19u);
}

TEST(Flip, InvolutionAndEnergy) {
  SeededRng rng(5);
  for (std::size_t n : {40, 41, 16, 9}) {
    const auto base = make_1d_target(gaussian_sample(rng, 0, 1, n), -1, 1);
    const auto once = make_flipped_target(base);
    const auto twice = make_flipped_target(once);
    double e0 = 0, e1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(twice.targets(i, 0), base.targets(i, 0), 1e-10);
      e0 += base.targets(i, 0) * base.targets(i, 0);
      e1 += once.targets(i, 0) * once.targets(i, 0);
    }
    EXPECT_NEAR(e1, e0, 1e-10 * e0);
    const auto s0 = dft(targets_of(base));
    const auto s1 = dft(targets_of(once));
    EXPECT_NEAR(s1.coefficients[0].real(), s0.coefficients[0].real(), 1e-10);
  }
}

TEST(Flip, PalindromeMagnitudeUnchanged) {
  // Magnitudes symmetric over 1..ceil(N/2)-1 are a fixed point of the reversal.
  const std::size_t n = 16;
  std::vector<Complex> c(n);
  const double mags[] = {0, 1, 2, 3, 4, 3, 2, 1, 0.5};
  for (std::size_t k = 0; k <= 8; ++k) c[k] = std::polar(mags[k], 0.3 * k);
  c[8] = 0.5;
  for (std::size_t k = 1; k < 8; ++k) c[n - k] = std::conj(c[k]);
  Spectrum s;
  s.coefficients = c;
  const auto base = make_1d_target(inverse_dft_real(s), -1, 1);
  const auto flipped = dft(targets_of(make_flipped_target(base)));
  for (std::size_t k = 0; k < n; ++k) EXPECT_NEAR(std::abs(flipped.coefficients[k]), std::abs(c[k]), 1e-10);
}

TEST(Flip, RequiresUniformGrid) {
  Dataset d;
  d.inputs = Matrix(3, 1, std::vector<double>{0, 1, 3});
  d.targets = Matrix(3, 1, std::vector<double>{1, 2, 3});
  EXPECT_THROW(make_flipped_target(d), InvalidArgument);
}

// ---------------------------------------------------------------------------
// PGM

std::string pgm_bytes(const std::string& header, const std::vector<std::uint8_t>& pixels) {
  return header + std::string(pixels.begin(), pixels.end());
}

TEST(Pgm, TwoByTwoNormalization) {
  std::istringstream in(pgm_bytes("P5\n2 2\n255\n", {0, 255, 255, 0}));
  const auto img = read_pgm(in);
  EXPECT_EQ(normalized_pixels(img), (std::vector<double>{-1, 1, 1, -1}));
}

TEST(Pgm, ConstantImageNormalizesToZero) {
  GrayImage img{3, 3, std::vector<std::uint8_t>(9, 77)};
  EXPECT_EQ(normalized_pixels(img), std::vector<double>(9, 0.0));
}

TEST(Pgm, FourByThreeGrid) {
  std::vector<std::uint8_t> px(12);
  for (std::size_t i = 0; i < 12; ++i) px[i] = static_cast<std::uint8_t>(i * 20);
  std::istringstream in(pgm_bytes("P5\n4 3\n255\n", px));
  const auto img = read_pgm(in);
  EXPECT_EQ(img.rows, 3u);
  EXPECT_EQ(img.cols, 4u);
  const auto d = image_dataset(img);
  ASSERT_EQ(d.size(), 12u);
  double xmin = 1e9, xmax = -1e9, ymin = 1e9, ymax = -1e9;
  for (std::size_t i = 0; i < 12; ++i) {
    xmin = std::min(xmin, d.inputs(i, 0));
    xmax = std::max(xmax, d.inputs(i, 0));
    ymin = std::min(ymin, d.inputs(i, 1));
    ymax = std::max(ymax, d.inputs(i, 1));
  }
  EXPECT_EQ(xmin, -1.0);
  EXPECT_EQ(xmax, 1.0);
  EXPECT_EQ(ymin, -1.0);
  EXPECT_EQ(ymax, 1.0);
  // Sample 5 is row 1, column 1.
  EXPECT_EQ(d.row_index[5], 1u);
  EXPECT_EQ(d.column_index[5], 1u);
  EXPECT_NEAR(d.inputs(5, 0), -1.0 + 2.0 / 3, 1e-15);
  EXPECT_NEAR(d.inputs(5, 1), 0.0, 1e-15);
}

TEST(Pgm, CommentsInHeader) {
  std::istringstream in(pgm_bytes("P5\n# made by hand\n2 1\n# another\n255\n", {10, 20}));
  const auto img = read_pgm(in);
  EXPECT_EQ(img.pixels, (std::vector<std::uint8_t>{10, 20}));
}

TEST(Pgm, MalformedHeaderReportsOffset) {
  std::istringstream bad_magic("P6\n2 2\n255\n    ");
  EXPECT_THROW(read_pgm(bad_magic), ParseError);
  std::istringstream bad_max(pgm_bytes("P5\n2 2\n300\n", {0, 0, 0, 0}));
  try {
    read_pgm(bad_max);
    FAIL() << "maxval 300 accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 7u);
  }
}

TEST(Pgm, TruncatedPayload) {
  std::istringstream in(pgm_bytes("P5\n2 2\n255\n", {1, 2, 3}));
  try {
    read_pgm(in);
    FAIL() << "truncated payload accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 14u);
  }
}

TEST(Pgm, WriteReadRoundTrip) {
  GrayImage img{2, 3, {1, 2, 3, 4, 5, 6}};
  std::stringstream ss;
  write_pgm(ss, img);
  const auto back = read_pgm(ss);
  EXPECT_EQ(back.pixels, img.pixels);
  EXPECT_EQ(back.rows, 2u);
  EXPECT_EQ(back.cols, 3u);
}

TEST(Pgm, LoadSetsProvenanceWithChecksum) {
  const auto dir = scratch_dir("load");
  write_pgm_file(dir / "a.pgm", GrayImage{1, 2, {0, 255}});
  const auto data = load_pgm(dir / "a.pgm");
  EXPECT_NE(data.dataset.provenance.find(file_checksum(dir / "a.pgm")), std::string::npos);
  EXPECT_THROW(load_pgm(dir / "missing.pgm"), IoError);
}

TEST(ImageRow, UsesWholeImageStatistics) {
  GrayImage img{2, 4, {0, 0, 0, 0, 255, 255, 255, 255}};
  const auto row = image_row_dataset(img, 1);
  ASSERT_EQ(row.size(), 4u);
  EXPECT_EQ(targets_of(row), std::vector<double>(4, 1.0));
  EXPECT_EQ(row.inputs(0, 0), -1.0);
  EXPECT_EQ(row.inputs(3, 0), 1.0);
  EXPECT_THROW(image_row_dataset(img, 2), InvalidArgument);
}

TEST(SplitOddColumns, FourColumns) {
  GrayImage img{2, 4, {1, 2, 3, 4, 5, 6, 7, 8}};
  const auto [train, test] = split_odd_columns(image_dataset(img));
  std::set<std::size_t> tc(train.column_index.begin(), train.column_index.end());
  std::set<std::size_t> ec(test.column_index.begin(), test.column_index.end());
  EXPECT_EQ(tc, (std::set<std::size_t>{0, 2}));
  EXPECT_EQ(ec, (std::set<std::size_t>{1, 3}));
}

TEST(SplitOddColumns, SingleColumn) {
  GrayImage img{3, 1, {1, 2, 3}};
  const auto [train, test] = split_odd_columns(image_dataset(img));
  EXPECT_EQ(train.size(), 3u);
  EXPECT_TRUE(test.empty());
}

TEST(SplitOddColumns, IsAPartition) {
  GrayImage img{5, 7, std::vector<std::uint8_t>(35)};
  for (std::size_t i = 0; i < 35; ++i) img.pixels[i] = static_cast<std::uint8_t>(7 * i);
  const auto all = image_dataset(img);
  const auto [train, test] = split_odd_columns(all);
  EXPECT_EQ(train.size() + test.size(), all.size());
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const Dataset* d : {&train, &test}) {
    for (std::size_t i = 0; i < d->size(); ++i) {
      EXPECT_TRUE(seen.insert({d->row_index[i], d->column_index[i]}).second);
    }
  }
  EXPECT_EQ(seen.size(), 35u);
}

TEST(SplitOddColumns, RowDatasetKeepsGrid) {
  GrayImage img{1, 8, {1, 2, 3, 4, 5, 6, 7, 8}};
  const auto [train, test] = split_odd_columns(image_row_dataset(img, 0));
  ASSERT_TRUE(train.grid);
  EXPECT_EQ(train.grid->count, 4u);
  EXPECT_NEAR(train.grid->spacing, 4.0 / 7, 1e-12);
}

TEST(SplitOddColumns, NeedsColumnIndices) {
  EXPECT_THROW(split_odd_columns(make_1d_target(TargetKind::kLinear, 4, 0, 1)), InvalidArgument);
}

// ---------------------------------------------------------------------------
// MNIST IDX

struct IdxFixture {
  fs::path images, labels;
};

IdxFixture write_fixture(const std::string& name, std::size_t count) {
  const auto dir = scratch_dir(name);
  std::vector<std::uint8_t> px(count * 28 * 28, 0);
  std::vector<std::uint8_t> lb(count);
  for (std::size_t i = 0; i < count; ++i) {
    lb[i] = static_cast<std::uint8_t>(i % 10);
    if (i > 0) px[i * 784 + i % 784] = 255;  // sample 0 stays all-zero
  }
  IdxFixture f{dir / "img.idx3", dir / "lbl.idx1"};
  write_idx_images(f.images, count, 28, 28, px);
  write_idx_labels(f.labels, lb);
  return f;
}

TEST(Mnist, ReadsWrittenFixture) {
  const auto f = write_fixture("read", 120);
  const auto d = load_mnist(f.images, f.labels);
  ASSERT_EQ(d.size(), 120u);
  EXPECT_EQ(d.input_dim(), 784u);
  EXPECT_EQ(d.target_dim(), 10u);
  for (std::size_t c = 0; c < 784; ++c) EXPECT_EQ(d.inputs(0, c), 0.0);
  EXPECT_EQ(d.inputs(3, 3), 1.0);
  for (std::size_t c = 0; c < 10; ++c) EXPECT_EQ(d.targets(13, c), c == 3 ? 1.0 : 0.0);
}

TEST(Mnist, LimitKeepsFileOrder) {
  const auto f = write_fixture("limit", 150);
  const auto d = load_mnist(f.images, f.labels, 100);
  ASSERT_EQ(d.size(), 100u);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(d.targets(i, i % 10), 1.0);
}

TEST(Mnist, MagicNumbers) {
  const auto f = write_fixture("magic", 3);
  std::ifstream in(f.images, std::ios::binary);
  unsigned char head[4];
  in.read(reinterpret_cast<char*>(head), 4);
  EXPECT_EQ(head[2], 0x08);
  EXPECT_EQ(head[3], 0x03);
  std::ifstream lin(f.labels, std::ios::binary);
  lin.read(reinterpret_cast<char*>(head), 4);
  EXPECT_EQ(head[3], 0x01);
  // Swapped files fail on the magic check.
  EXPECT_THROW(load_mnist(f.labels, f.images), ParseError);
}

TEST(Mnist, CountMismatchAndTruncation) {
  const auto a = write_fixture("mismatch-a", 5);
  const auto b = write_fixture("mismatch-b", 6);
  EXPECT_THROW(load_mnist(a.images, b.labels), ParseError);
  fs::resize_file(a.images, fs::file_size(a.images) - 10);
  EXPECT_THROW(load_mnist(a.images, a.labels), ParseError);
  EXPECT_THROW(load_mnist(a.images.parent_path() / "none", a.labels), IoError);
}

TEST(Mnist, BundledSubsetLoads) {
  const fs::path data = FPLAB_TEST_DATA_DIR;
  const auto train = load_mnist(data / "mnist-train-images.idx3-ubyte", data / "mnist-train-labels.idx1-ubyte");
  const auto test = load_mnist(data / "mnist-test-images.idx3-ubyte", data / "mnist-test-labels.idx1-ubyte");
  EXPECT_EQ(train.size(), 2000u);
  EXPECT_EQ(test.size(), 1000u);
}

}  // namespace
}  // namespace fplab
