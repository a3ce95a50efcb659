#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tpinn/dataset.hpp"
#include "tpinn/error.hpp"
#include "tpinn/rng.hpp"

using namespace tpinn;
using namespace tpinn::data;

#ifndef TPINN_FIXTURE_CSV
#define TPINN_FIXTURE_CSV "data/lattice_fixture.csv"
#endif

namespace {

std::string header() { return std::string(kCsvHeader) + "\n"; }

LatticeDataset rows_of(std::initializer_list<LatticeRow> r) { return LatticeDataset(std::vector<LatticeRow>(r)); }

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::array<double, kPolyTerms> kPlanted{2.5, -1.25, 0.75, 0.5, -0.3, 0.2, 0.04, -0.06, 0.03, -0.01};

}  // namespace

TEST(Csv, ParsesInOrder) {
  auto ds = parse_csv(header() + "2,20,1.5\n3,18,2.25\n4,25,3\n");
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.rows()[0], (LatticeRow{2, 20, 1.5}));
  EXPECT_EQ(ds.rows()[2], (LatticeRow{4, 25, 3}));
}

TEST(Csv, NegativeStressNamesRow) {
  try {
    parse_csv(header() + "2,20,1.5\n3,18,-1\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
}

TEST(Csv, StrutMustBeSmallerThanCell) {
  EXPECT_THROW(parse_csv(header() + "20,20,1\n"), ValidationError);
  EXPECT_THROW(parse_csv(header() + "0,20,1\n"), ValidationError);
}

TEST(Csv, BadHeaderAndColumns) {
  EXPECT_THROW(parse_csv("a,b,c\n1,2,3\n"), FormatError);
  EXPECT_THROW(parse_csv(header() + "1,2\n"), FormatError);
  EXPECT_THROW(parse_csv(header() + "1,2,3,4\n"), FormatError);
  EXPECT_THROW(parse_csv(header() + "1,2,x\n"), FormatError);
  EXPECT_THROW(parse_csv(""), FormatError);
}

TEST(Csv, EmptyDatasetRejected) {
  EXPECT_THROW(parse_csv(header()), ValidationError);
  EXPECT_THROW(LatticeDataset(std::vector<LatticeRow>{}), ValidationError);
}

TEST(Csv, ToleratesCrlfAndBom) {
  auto ds = parse_csv("\xEF\xBB\xBF" + std::string(kCsvHeader) + "\r\n2,20,1.5\r\n\r\n");
  EXPECT_EQ(ds.size(), 1u);
}

TEST(Csv, RoundTripIsByteExact) {
  const std::string canonical = header() + "2,20,1.247\n2.2,17.5,1.83\n0.1,0.30000000000000004,1e-05\n";
  EXPECT_EQ(to_csv(parse_csv(canonical)), canonical);

  const auto dir = std::filesystem::temp_directory_path() / "tpinn_data_test";
  std::filesystem::create_directories(dir);
  auto ds = load_csv(TPINN_FIXTURE_CSV);
  save_csv(ds, dir / "copy.csv");
  EXPECT_EQ(read_file(dir / "copy.csv"), read_file(TPINN_FIXTURE_CSV));
  EXPECT_EQ(load_csv(dir / "copy.csv"), ds);
  EXPECT_THROW(load_csv(dir / "missing.csv"), IoError);
}

TEST(Features, Examples) {
  auto ones = poly_features(1, 1);
  for (double v : ones) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(poly_features(2, 3), (std::array<double, 10>{1, 2, 3, 4, 6, 9, 8, 12, 18, 27}));
  EXPECT_EQ(poly_features(0, 0), (std::array<double, 10>{1, 0, 0, 0, 0, 0, 0, 0, 0, 0}));
}

TEST(Fit, RecoversPlantedCubic) {
  Rng rng(2024);
  std::vector<std::array<double, 3>> pts;
  PolynomialModel truth{kPlanted};
  for (int i = 0; i < 30; ++i) {
    const double d = rng.uniform(-2, 2), s = rng.uniform(-2, 2);
    pts.push_back({d, s, truth.predict(d, s)});
  }
  auto m = fit_polynomial(pts);
  for (std::size_t k = 0; k < kPolyTerms; ++k) EXPECT_NEAR(m.coeffs[k], kPlanted[k], 1e-8) << k;
}

TEST(Fit, ConstantTarget) {
  auto raw = load_csv(TPINN_FIXTURE_CSV);
  std::vector<LatticeRow> rows = raw.rows();
  for (auto& r : rows) r.yield_stress = 5.0;
  auto m = fit_polynomial(LatticeDataset(rows));
  EXPECT_NEAR(m.coeffs[0], 5.0, 1e-10);
  // exact fit regardless of how the constant is spread over the basis
  for (auto& r : rows) EXPECT_NEAR(m.predict(r.strut_diameter, r.unit_cell), 5.0, 1e-10);
}

TEST(Fit, ConstantTargetOnCenteredData) {
  Rng rng(9);
  std::vector<std::array<double, 3>> pts;
  for (int i = 0; i < 25; ++i) pts.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), 5.0});
  auto m = fit_polynomial(pts);
  EXPECT_NEAR(m.coeffs[0], 5.0, 1e-10);
  for (std::size_t k = 1; k < kPolyTerms; ++k) EXPECT_NEAR(m.coeffs[k], 0.0, 1e-10);
}

TEST(Fit, TooFewRowsIsRankError) {
  std::vector<std::array<double, 3>> pts{{1, 2, 3}, {2, 3, 4}, {3, 5, 1}, {4, 7, 2}, {5, 9, 9}};
  try {
    fit_polynomial(pts);
    FAIL();
  } catch (const RankError& e) {
    EXPECT_LE(e.rank(), 5u);
  }
  // 12 rows on a line: still rank deficient
  std::vector<std::array<double, 3>> line;
  for (int i = 0; i < 12; ++i) line.push_back({1.0 + i, 2.0 + i, 1.0});
  EXPECT_THROW(fit_polynomial(line), RankError);
}

TEST(Fit, ScaleConsistent) {
  auto raw = load_csv(TPINN_FIXTURE_CSV);
  auto base = fit_polynomial(raw);
  std::vector<LatticeRow> rows = raw.rows();
  for (auto& r : rows) r.yield_stress *= 3.5;
  auto scaled = fit_polynomial(LatticeDataset(rows));
  for (std::size_t k = 0; k < kPolyTerms; ++k) {
    EXPECT_NEAR(scaled.coeffs[k], 3.5 * base.coeffs[k], 1e-10 * std::max(1.0, std::abs(3.5 * base.coeffs[k])));
  }
  EXPECT_GT(r_squared(base, raw), 0.9);
  EXPECT_LE(r_squared(base, raw), 1.0);
}

TEST(Interpolate, MidpointOfTwoRows) {
  auto raw = rows_of({{2, 20, 1}, {4, 24, 3}});
  auto out = interpolate_dataset(raw, 3);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out.rows()[1], (LatticeRow{3, 22, 2}));
  EXPECT_EQ(out.provenance(), Provenance::Synthetic);
}

TEST(Interpolate, KnotsReproduceInput) {
  auto raw = load_csv(TPINN_FIXTURE_CSV);
  auto out = interpolate_dataset(raw, raw.size());
  EXPECT_EQ(out.rows(), raw.rows());
  // 27 = 2 * (14 - 1) + 1 hits every knot too
  auto dense = interpolate_dataset(raw, 27);
  for (std::size_t i = 0; i < raw.size(); ++i) EXPECT_EQ(dense.rows()[2 * i], raw.rows()[i]);
}

TEST(Interpolate, StaysInsideBracketingEnvelope) {
  auto raw = rows_of({{2, 20, 1.2}, {3.5, 16, 4.0}, {2.5, 24, 2.0}, {5, 21, 6.1}});
  auto out = interpolate_dataset(raw, 1000);
  ASSERT_EQ(out.size(), 1000u);
  EXPECT_EQ(out.rows().front(), raw.rows().front());
  EXPECT_EQ(out.rows().back(), raw.rows().back());
  const std::size_t m = raw.size();
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double tau = static_cast<double>(j) / 999.0;
    std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(tau * (m - 1)), m - 2);
    const auto& a = raw.rows()[k];
    const auto& b = raw.rows()[k + 1];
    const auto& r = out.rows()[j];
    auto inside = [](double v, double p, double q) { return v >= std::min(p, q) && v <= std::max(p, q); };
    EXPECT_TRUE(inside(r.strut_diameter, a.strut_diameter, b.strut_diameter)) << j;
    EXPECT_TRUE(inside(r.unit_cell, a.unit_cell, b.unit_cell)) << j;
    EXPECT_TRUE(inside(r.yield_stress, a.yield_stress, b.yield_stress)) << j;
  }
}

TEST(Interpolate, Errors) {
  auto raw = rows_of({{2, 20, 1}, {4, 24, 3}, {3, 22, 2}});
  EXPECT_THROW(interpolate_dataset(raw, 1), ConfigError);
  EXPECT_THROW(interpolate_dataset(raw, 2), ConfigError);
  EXPECT_THROW(interpolate_dataset(rows_of({{2, 20, 1}}), 10), ConfigError);
}

TEST(Interpolate, PolynomialTargets) {
  auto raw = load_csv(TPINN_FIXTURE_CSV);
  auto model = fit_polynomial(raw);
  auto out = interpolate_dataset(raw, 50, TargetSource::Polynomial, &model);
  for (const auto& r : out.rows()) EXPECT_EQ(r.yield_stress, model.predict(r.strut_diameter, r.unit_cell));
  EXPECT_THROW(interpolate_dataset(raw, 50, TargetSource::Polynomial, nullptr), ConfigError);
}

TEST(Split, SizesAndDeterminism) {
  auto raw = load_csv(TPINN_FIXTURE_CSV);
  auto big = interpolate_dataset(raw, 1000);
  auto [train, test] = train_test_split(big, 0.8, 42);
  EXPECT_EQ(train.size(), 800u);
  EXPECT_EQ(test.size(), 200u);
  auto again = train_test_split(big, 0.8, 42);
  EXPECT_EQ(again.first, train);
  EXPECT_EQ(again.second, test);
  auto other = train_test_split(big, 0.8, 43);
  EXPECT_NE(other.first, train);
}

TEST(Split, DisjointUnion) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.below(300);
    const double frac = rng.uniform(0.05, 0.95);
    auto [tr, te] = split_indices(n, frac, seed);
    if (tr.empty() || te.empty()) continue;
    EXPECT_EQ(tr.size(), static_cast<std::size_t>(std::llround(frac * n)));
    std::set<std::size_t> all(tr.begin(), tr.end());
    all.insert(te.begin(), te.end());
    EXPECT_EQ(all.size(), n);
    EXPECT_EQ(tr.size() + te.size(), n);
  }
}

TEST(Split, FractionBounds) {
  auto raw = load_csv(TPINN_FIXTURE_CSV);
  EXPECT_THROW(train_test_split(raw, 0.0, 1), ConfigError);
  EXPECT_THROW(train_test_split(raw, 1.0, 1), ConfigError);
  EXPECT_THROW(train_test_split(raw, -0.2, 1), ConfigError);
}
