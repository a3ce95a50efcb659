#include "tpinn/dataset.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "tpinn/error.hpp"
#include "tpinn/numfmt.hpp"
#include "tpinn/rng.hpp"

namespace tpinn::data {

void validate_row(const LatticeRow& row, std::size_t row_number) {
  const std::array<std::pair<const char*, double>, 3> cols{{{"strut_diameter_mm", row.strut_diameter},
                                                            {"unit_cell_mm", row.unit_cell},
                                                            {"yield_stress_mpa", row.yield_stress}}};
  for (const auto& [name, v] : cols) {
    if (!std::isfinite(v)) throw ValidationError(row_number, std::string(name) + " is not finite");
    if (!(v > 0.0)) {
      throw ValidationError(row_number, std::string(name) + " must be positive, got " + format_shortest(v));
    }
  }
  if (!(row.strut_diameter < row.unit_cell)) {
    throw ValidationError(row_number, "strut diameter " + format_shortest(row.strut_diameter) +
                                          " mm is not smaller than the unit cell " +
                                          format_shortest(row.unit_cell) + " mm");
  }
}

LatticeDataset::LatticeDataset(std::vector<LatticeRow> rows, Provenance provenance)
    : rows_(std::move(rows)), provenance_(provenance) {
  if (rows_.empty()) throw ValidationError("dataset has no rows");
  for (std::size_t i = 0; i < rows_.size(); ++i) validate_row(rows_[i], i + 1);
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

LatticeDataset parse_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(chomp(text.substr(start, nl - start)));
    start = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw FormatError("empty file; expected header '" + std::string(kCsvHeader) + "'");

  std::string_view header = lines.front();
  if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") header.remove_prefix(3);
  if (header != kCsvHeader) {
    throw FormatError("header '" + std::string(header) + "' does not match '" + std::string(kCsvHeader) + "'");
  }

  std::vector<LatticeRow> rows;
  rows.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t row_number = i;
    const auto fields = split_fields(lines[i]);
    if (fields.size() != 3) {
      throw FormatError("row " + std::to_string(row_number) + " (line " + std::to_string(i + 1) + ") has " +
                        std::to_string(fields.size()) + " columns, expected 3");
    }
    const std::string where = "value in row " + std::to_string(row_number);
    LatticeRow r{parse_double(fields[0], where), parse_double(fields[1], where), parse_double(fields[2], where)};
    validate_row(r, row_number);
    rows.push_back(r);
  }
  if (rows.empty()) throw ValidationError("dataset has no rows");
  return LatticeDataset(std::move(rows), Provenance::Raw);
}

LatticeDataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

std::string to_csv(const LatticeDataset& ds) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const LatticeRow& r : ds.rows()) {
    out += format_shortest(r.strut_diameter);
    out += ',';
    out += format_shortest(r.unit_cell);
    out += ',';
    out += format_shortest(r.yield_stress);
    out += '\n';
  }
  return out;
}

void save_csv(const LatticeDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  const std::string text = to_csv(ds);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::array<double, kPolyTerms> poly_features(double d, double s) {
  return {1.0, d, s, d * d, d * s, s * s, d * d * d, d * d * s, d * s * s, s * s * s};
}

double PolynomialModel::predict(double d, double s) const {
  const auto phi = poly_features(d, s);
  double acc = 0.0;
  for (std::size_t k = 0; k < kPolyTerms; ++k) acc += coeffs[k] * phi[k];
  return acc;
}

PolynomialModel fit_polynomial(const std::vector<std::array<double, 3>>& dsy) {
  const auto n = static_cast<Eigen::Index>(dsy.size());
  Eigen::MatrixXd A(n, static_cast<Eigen::Index>(kPolyTerms));
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = dsy[static_cast<std::size_t>(i)];
    const auto phi = poly_features(r[0], r[1]);
    for (std::size_t k = 0; k < kPolyTerms; ++k) A(i, static_cast<Eigen::Index>(k)) = phi[k];
    y(i) = r[2];
  }
  if (n < static_cast<Eigen::Index>(kPolyTerms)) {
    throw RankError(static_cast<std::size_t>(n), kPolyTerms);
  }
  // Equilibrate columns so the monomials of very different magnitudes pivot
  // on their shape rather than their scale.
  Eigen::VectorXd scale = A.colwise().norm().transpose();
  for (Eigen::Index k = 0; k < scale.size(); ++k) {
    if (scale(k) == 0.0) scale(k) = 1.0;
  }
  const Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(As);
  qr.setThreshold(1e-12);
  const auto rank = static_cast<std::size_t>(qr.rank());
  if (rank < kPolyTerms) throw RankError(rank, kPolyTerms);
  const Eigen::VectorXd beta = qr.solve(y).cwiseQuotient(scale);

  PolynomialModel model;
  for (std::size_t k = 0; k < kPolyTerms; ++k) model.coeffs[k] = beta(static_cast<Eigen::Index>(k));
  return model;
}

PolynomialModel fit_polynomial(const LatticeDataset& ds) {
  std::vector<std::array<double, 3>> dsy;
  dsy.reserve(ds.size());
  for (const auto& r : ds.rows()) dsy.push_back({r.strut_diameter, r.unit_cell, r.yield_stress});
  return fit_polynomial(dsy);
}

double r_squared(const PolynomialModel& model, const LatticeDataset& ds) {
  double mean = 0.0;
  for (const auto& r : ds.rows()) mean += r.yield_stress;
  mean /= static_cast<double>(ds.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (const auto& r : ds.rows()) {
    const double e = r.yield_stress - model.predict(r.strut_diameter, r.unit_cell);
    ss_res += e * e;
    ss_tot += (r.yield_stress - mean) * (r.yield_stress - mean);
  }
  return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
}

LatticeDataset interpolate_dataset(const LatticeDataset& raw, std::size_t n) {
  return interpolate_dataset(raw, n, TargetSource::Interpolated, nullptr);
}

LatticeDataset interpolate_dataset(const LatticeDataset& raw, std::size_t n, TargetSource targets,
                                   const PolynomialModel* model) {
  if (n < 2) throw ConfigError("synthetic row count must be at least 2");
  const std::size_t m = raw.size();
  if (m < 2) throw ConfigError("interpolation needs at least 2 raw rows");
  if (n < m) {
    throw ConfigError("synthetic row count " + std::to_string(n) + " is below the raw row count " +
                      std::to_string(m));
  }
  if (targets == TargetSource::Polynomial && model == nullptr) {
    throw ConfigError("polynomial targets need a fitted model");
  }

  const auto& rows = raw.rows();
  std::vector<LatticeRow> out;
  out.reserve(n);
  // Position of sample j on the knot axis is j (m-1) / (n-1); integer
  // arithmetic keeps knot hits exact.
  const std::uint64_t segs = m - 1;
  const std::uint64_t denom = n - 1;
  for (std::uint64_t j = 0; j < n; ++j) {
    const std::uint64_t num = j * segs;
    const std::size_t i = static_cast<std::size_t>(num / denom);
    const std::uint64_t rem = num % denom;
    LatticeRow r;
    if (rem == 0) {
      r = rows[i];
    } else {
      const double f = static_cast<double>(rem) / static_cast<double>(denom);
      const LatticeRow& a = rows[i];
      const LatticeRow& b = rows[i + 1];
      r.strut_diameter = std::lerp(a.strut_diameter, b.strut_diameter, f);
      r.unit_cell = std::lerp(a.unit_cell, b.unit_cell, f);
      r.yield_stress = std::lerp(a.yield_stress, b.yield_stress, f);
    }
    if (targets == TargetSource::Polynomial) r.yield_stress = model->predict(r.strut_diameter, r.unit_cell);
    out.push_back(r);
  }
  return LatticeDataset(std::move(out), Provenance::Synthetic);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n,
                                                                            double train_fraction,
                                                                            std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(idx));
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  std::vector<std::size_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  return {std::move(train), std::move(test)};
}

std::pair<LatticeDataset, LatticeDataset> train_test_split(const LatticeDataset& ds, double train_fraction,
                                                           std::uint64_t seed) {
  const auto [train_idx, test_idx] = split_indices(ds.size(), train_fraction, seed);
  if (train_idx.empty() || test_idx.empty()) {
    throw ConfigError("split of " + std::to_string(ds.size()) + " rows leaves an empty side");
  }
  std::vector<LatticeRow> train;
  std::vector<LatticeRow> test;
  for (std::size_t i : train_idx) train.push_back(ds.rows()[i]);
  for (std::size_t i : test_idx) test.push_back(ds.rows()[i]);
  return {LatticeDataset(std::move(train), ds.provenance()), LatticeDataset(std::move(test), ds.provenance())};
}

}  // namespace tpinn::data
