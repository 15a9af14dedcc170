#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <filesystem>
#include <random>
#include <sstream>

#include "fexprobe/error.hpp"
#include "fexprobe/ks_matrix.hpp"

using namespace fexprobe;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected fexprobe::Error";
  return ErrorCode::IoError;
}

KSMatrix random_matrix(std::size_t nf, std::size_t nc, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(nf * nc);
  for (auto& x : v) x = u(gen);
  return KSMatrix(nf, nc, std::move(v));
}

}  // namespace

TEST(KSMatrix, LayoutIsFeatureMajor) {
  const KSMatrix ks(2, 3, {0.1f, 0.2f, 0.3f, 0.4f, 0.5f, 0.6f});
  EXPECT_EQ(ks.at(1, 0), 0.4f);
  EXPECT_EQ(ks.feature_row(0)[2], 0.3f);
  EXPECT_EQ(ks.class_column(1), (std::vector<float>{0.2f, 0.5f}));
}

TEST(KSMatrix, ValidatesValues) {
  EXPECT_EQ(code_of([] { KSMatrix(2, 2, {0.0f}); }), ErrorCode::InvalidShape);
  EXPECT_EQ(code_of([] { KSMatrix(1, 1, {1.5f}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { KSMatrix(1, 1, {std::nanf("")}); }), ErrorCode::InvalidArgument);
}

TEST(KSMatrixFile, RoundTripIsBitExact) {
  const auto ks = random_matrix(123, 7, 5);
  const auto path = std::filesystem::temp_directory_path() / "fexprobe_ks_test.ksm";
  save_ks_matrix(ks, path);
  EXPECT_EQ(std::filesystem::file_size(path), 16u + 123 * 7 * 4);
  const auto back = load_ks_matrix(path);
  EXPECT_EQ(back.n_features(), 123u);
  EXPECT_EQ(back.n_classes(), 7u);
  EXPECT_EQ(std::memcmp(back.values().data(), ks.values().data(), 123 * 7 * 4), 0);
  std::filesystem::remove(path);
}

TEST(KSMatrixFile, Errors) {
  const auto ks = random_matrix(3, 2, 6);
  std::ostringstream out(std::ios::binary);
  write_ks_matrix(ks, out);
  const std::string s = out.str();
  auto read = [](const std::string& bytes) {
    std::istringstream in(bytes, std::ios::binary);
    return code_of([&] { read_ks_matrix(in); });
  };
  EXPECT_EQ(read("KSM2" + s.substr(4)), ErrorCode::UnsupportedFormat);
  EXPECT_EQ(read(s.substr(0, s.size() - 2)), ErrorCode::CorruptFile);
  EXPECT_EQ(read(s + "abcd"), ErrorCode::CorruptFile);
  std::string out_of_range = s;
  const float big = 2.0f;
  std::memcpy(out_of_range.data() + 16, &big, 4);
  EXPECT_EQ(read(out_of_range), ErrorCode::CorruptFile);
}
