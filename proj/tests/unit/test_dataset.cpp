#include "pwgee/dataset.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <sstream>

using namespace pwgee;

namespace {

LongitudinalDataset parse(const std::string& text, CsvColumns cols = {"y", "id", {}}) {
  std::istringstream in(text);
  return read_long_csv(in, cols);
}

}  // namespace

TEST_CASE("rows are grouped into clusters in first-appearance order") {
  const auto d = parse("id,y,a,b\n1,0.5,1,2\n1,1.5,3,4\n2,2,5,6\n2,3,7,8\n2,4,9,10\n3,5,11,12\n");
  CHECK(d.n() == 3);
  CHECK(d.p() == 2);
  CHECK(d.cluster(0).size() == 2);
  CHECK(d.cluster(1).size() == 3);
  CHECK(d.cluster(2).size() == 1);
  CHECK(d.total_observations() == 6);
  CHECK(d.cluster(1).x(2, 1) == 10.0);
  CHECK(d.cluster(0).y(1) == 1.5);
  CHECK(d.covariate_names() == std::vector<std::string>{"a", "b"});
}

TEST_CASE("non-contiguous cluster rows are grouped, preserving row order") {
  const auto a = parse("id,y,x\n1,1,1\n2,2,2\n1,3,3\n2,4,4\n");
  CHECK(a.n() == 2);
  CHECK(a.cluster(0).y(0) == 1.0);
  CHECK(a.cluster(0).y(1) == 3.0);
  // Shuffling whole-cluster blocks leaves each cluster's contents unchanged.
  const auto b = parse("id,y,x\n2,2,2\n2,4,4\n1,1,1\n1,3,3\n");
  CHECK(b.cluster(1).id == "1");
  CHECK(b.cluster(1).y == a.cluster(0).y);
  CHECK(b.cluster(1).x == a.cluster(0).x);
}

TEST_CASE("305 clusters with 659 rows and four covariates") {
  std::ostringstream csv;
  csv << "subject,severity,age,sex,p1,p2\n";
  int rows = 0;
  for (int i = 0; i < 305; ++i) {
    const int m = i < 49 ? 3 : 2;  // 49*3 + 256*2 = 659
    for (int j = 0; j < m; ++j, ++rows) csv << "s" << i << ',' << (rows % 2) << ',' << rows * 0.1 << ",1,0.5,-0.5\n";
  }
  REQUIRE(rows == 659);
  const auto d = parse(csv.str(), {"severity", "subject", {}});
  CHECK(d.n() == 305);
  CHECK(d.p() == 4);
  CHECK(d.total_observations() == 659);
}

TEST_CASE("explicit covariate selection, quoting, CRLF and BOM") {
  const auto d = parse("\xEF\xBB\xBFid,y,\"skip,me\",x\r\n\"a\",1,9,2\r\n\"a\",2,9,3\r\n\r\nb,3,9,4\r\n",
                       {"y", "id", {"x"}});
  CHECK(d.n() == 2);
  CHECK(d.p() == 1);
  CHECK(d.cluster(0).id == "a");
  CHECK(d.cluster(0).x(1, 0) == 3.0);
}

TEST_CASE("load errors") {
  CHECK_THROWS_WITH_AS(parse("id,y,x\n1,1,NA\n"), doctest::Contains("non-numeric cell"), Error);
  CHECK_THROWS_WITH_AS(parse("id,y,x\n1,1,\n"), doctest::Contains("non-numeric cell"), Error);
  CHECK_THROWS_WITH_AS(parse("id,resp,x\n1,1,1\n"), doctest::Contains("missing column 'y'"), Error);
  CHECK_THROWS_WITH_AS(parse(""), doctest::Contains("empty file"), Error);
  CHECK_THROWS_WITH_AS(parse("id,y,x\n"), doctest::Contains("empty file"), Error);
  CHECK_THROWS_AS(load_long_csv("/nonexistent/file.csv", {"y", "id", {}}), Error);
}

TEST_CASE("duplicate rows are allowed") {
  const auto d = parse("id,y,x\n1,1,1\n1,1,1\n");
  CHECK(d.cluster(0).size() == 2);
}

TEST_CASE("constructor invariants") {
  ClusterData a{"a", Vector::Ones(2), Matrix::Ones(2, 3)};
  ClusterData bad_rows{"b", Vector::Ones(2), Matrix::Ones(3, 3)};
  ClusterData bad_cols{"c", Vector::Ones(2), Matrix::Ones(2, 2)};
  ClusterData dup{"a", Vector::Ones(1), Matrix::Ones(1, 3)};
  CHECK_THROWS_AS(LongitudinalDataset({a, bad_rows}), Error);
  CHECK_THROWS_AS(LongitudinalDataset({a, bad_cols}), Error);
  CHECK_THROWS_AS(LongitudinalDataset({a, dup}), Error);
  CHECK_THROWS_AS(LongitudinalDataset(std::vector<ClusterData>{}), Error);
}

TEST_CASE("CSV round trip is exact") {
  const auto d = testutil::random_data(5, 12, 4, 3);
  std::ostringstream out;
  write_long_csv(out, d);
  std::istringstream in(out.str());
  const auto back = read_long_csv(in, {"y", "cluster", {}});
  REQUIRE(back.n() == d.n());
  CHECK(back.covariate_names() == d.covariate_names());
  for (Index i = 0; i < d.n(); ++i) {
    CHECK(back.cluster(i).id == d.cluster(i).id);
    CHECK(back.cluster(i).y == d.cluster(i).y);
    CHECK(back.cluster(i).x == d.cluster(i).x);
  }
  CHECK(back.content_hash() == d.content_hash());
}

TEST_CASE("subset and column selection") {
  const auto d = testutil::random_data(6, 8, 3, 4);
  const IndexSet rows{1, 5};
  const auto s = d.subset(rows);
  CHECK(s.n() == 2);
  CHECK(s.cluster(1).y == d.cluster(5).y);
  const IndexSet cols{3, 0};
  const auto c = d.select_columns(cols);
  CHECK(c.p() == 2);
  CHECK(c.cluster(2).x.col(0) == d.cluster(2).x.col(3));
  CHECK(c.covariate_names()[1] == "x1");
  CHECK(d.content_hash() != s.content_hash());
}

TEST_CASE("standardization uses the pooled sample sd") {
  const auto d = parse("id,y,x,z\n1,0,1,4\n1,0,2,4\n2,0,3,5\n");
  const IndexSet keep{1};
  const auto s = standardize_covariates(d, keep);
  CHECK(s.means(0) == doctest::Approx(2.0));
  CHECK(s.sds(0) == doctest::Approx(1.0));
  CHECK(s.data.cluster(0).x(0, 0) == doctest::Approx(-1.0));
  CHECK(s.data.cluster(0).x(1, 0) == doctest::Approx(0.0));
  CHECK(s.data.cluster(1).x(0, 0) == doctest::Approx(1.0));
  CHECK(s.data.cluster(1).x(0, 1) == 5.0);  // kept column untouched

  const auto again = standardize_covariates(s.data, keep);
  for (Index i = 0; i < d.n(); ++i) {
    CHECK((again.data.cluster(i).x - s.data.cluster(i).x).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_WITH_AS(standardize_covariates(parse("id,y,c\n1,0,5\n1,0,5\n2,0,5\n")),
                       doctest::Contains("zero-variance column 'c'"), Error);
}
