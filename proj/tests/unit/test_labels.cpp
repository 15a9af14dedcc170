#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "fexprobe/error.hpp"
#include "fexprobe/labels.hpp"

using namespace fexprobe;

namespace {

ErrorCode read_error(const std::string& csv) {
  std::istringstream in(csv);
  try {
    read_labels(in);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected InvalidLabels for:\n" << csv;
  return ErrorCode::IoError;
}

}  // namespace

TEST(LabelTable, SixtySevenClassesOfOneHundred) {
  std::ostringstream csv;
  csv << "row,class_id,class_name\n";
  for (int r = 0; r < 6700; ++r) csv << r << ',' << (r / 100) * 3 << ",cls" << r / 100 << '\n';
  std::istringstream in(csv.str());
  const auto t = read_labels(in);
  EXPECT_EQ(t.n_rows(), 6700u);
  ASSERT_EQ(t.n_classes(), 67u);
  for (auto c : t.counts()) EXPECT_EQ(c, 100u);
  EXPECT_EQ(t.classes()[5].id, 15u);
  EXPECT_EQ(t.classes()[5].name, "cls5");
  EXPECT_EQ(t.index_of_id(15), 5u);
  EXPECT_FALSE(t.index_of_id(16));
  EXPECT_EQ(t.class_of_row(501), 5u);
}

TEST(LabelTable, RowOrderDoesNotMatter) {
  std::vector<int> rows(50);
  std::iota(rows.begin(), rows.end(), 0);
  std::ostringstream sorted, shuffled;
  sorted << "row,class_id\n";
  shuffled << "row,class_id\n";
  for (int r : rows) sorted << r << ',' << r % 7 << '\n';
  std::shuffle(rows.begin(), rows.end(), std::mt19937(1));
  for (int r : rows) shuffled << r << ',' << r % 7 << '\n';
  std::istringstream a(sorted.str()), b(shuffled.str());
  EXPECT_EQ(read_labels(a), read_labels(b));
}

TEST(LabelTable, DefaultNamesAreIds) {
  std::istringstream in("row,class_id\n0,42\n1,7\n");
  const auto t = read_labels(in);
  EXPECT_EQ(t.classes()[0].name, "7");
  EXPECT_EQ(t.classes()[1].name, "42");
  EXPECT_EQ(t.class_of_row(0), 1u);
}

TEST(LabelTable, AcceptsCrLf) {
  std::istringstream in("row,class_id,class_name\r\n0,1,a\r\n1,2,b\r\n");
  const auto t = read_labels(in);
  EXPECT_EQ(t.classes()[1].name, "b");
}

TEST(LabelTable, RejectsMalformedFiles) {
  EXPECT_EQ(read_error(""), ErrorCode::InvalidLabels);
  EXPECT_EQ(read_error("image,class\n0,1\n"), ErrorCode::InvalidLabels);
  EXPECT_EQ(read_error("row,class_id\n0,1\n2,1\n"), ErrorCode::InvalidLabels);  // row 1 missing
  EXPECT_EQ(read_error("row,class_id\n0,1\n0,2\n"), ErrorCode::InvalidLabels);  // duplicate
  EXPECT_EQ(read_error("row,class_id\n0,x\n"), ErrorCode::InvalidLabels);
  EXPECT_EQ(read_error("row,class_id,class_name\n0,1,a\n1,1,b\n"), ErrorCode::InvalidLabels);
}

TEST(LabelTable, RoundTrip) {
  const std::vector<std::uint32_t> ids{3, 1, 3, 2, 1, 1};
  const std::vector<LabelTable::ClassInfo> names{{1, "one"}, {3, "three"}};
  const auto t = LabelTable::from_class_ids(ids, names);
  std::ostringstream out;
  write_labels(t, out);
  std::istringstream in(out.str());
  EXPECT_EQ(read_labels(in), t);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "row,class_id,class_name");
}

TEST(LabelTable, WithAssignmentKeepsRoster) {
  const std::vector<std::uint32_t> ids{0, 0, 1, 1, 1};
  const auto t = LabelTable::from_class_ids(ids);
  const auto u = t.with_assignment({1, 1, 1, 0, 0});
  EXPECT_EQ(u.classes(), t.classes());
  EXPECT_EQ(u.counts()[0], 2u);
  EXPECT_EQ(u.counts()[1], 3u);
  EXPECT_THROW(t.with_assignment({0, 1, 2, 0, 0}), Error);
}

TEST(LabelTable, SingleClassLoadsButHasOneClass) {
  std::istringstream in("row,class_id\n0,4\n1,4\n");
  EXPECT_EQ(read_labels(in).n_classes(), 1u);
}
