#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tpinn::data {

inline constexpr std::string_view kCsvHeader = "strut_diameter_mm,unit_cell_mm,yield_stress_mpa";

struct LatticeRow {
  double strut_diameter = 0.0;  // mm
  double unit_cell = 0.0;       // mm
  double yield_stress = 0.0;    // MPa

  friend bool operator==(const LatticeRow&, const LatticeRow&) = default;
};

enum class Provenance { Raw, Synthetic };

class LatticeDataset {
 public:
  LatticeDataset() = default;
  // Validates every row: all values finite and positive, strut_diameter <
  // unit_cell. Throws ValidationError carrying the 1-based row number.
  explicit LatticeDataset(std::vector<LatticeRow> rows, Provenance provenance = Provenance::Raw);

  const std::vector<LatticeRow>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  Provenance provenance() const noexcept { return provenance_; }

  friend bool operator==(const LatticeDataset&, const LatticeDataset&) = default;

 private:
  std::vector<LatticeRow> rows_;
  Provenance provenance_ = Provenance::Raw;
};

void validate_row(const LatticeRow& row, std::size_t row_number);

// The header must match kCsvHeader exactly (FormatError otherwise). Empty
// trailing lines are ignored. A dataset with no rows is a ValidationError.
LatticeDataset parse_csv(std::string_view text);
LatticeDataset load_csv(const std::filesystem::path& path);

// Canonical form: header, then shortest round-trip decimals, '\n' after every row.
std::string to_csv(const LatticeDataset& ds);
void save_csv(const LatticeDataset& ds, const std::filesystem::path& path);

// Degree-3 monomials in (d, s): [1, d, s, d^2, d s, s^2, d^3, d^2 s, d s^2, s^3].
inline constexpr std::size_t kPolyTerms = 10;
std::array<double, kPolyTerms> poly_features(double d, double s);

struct PolynomialModel {
  static constexpr int degree = 3;
  std::array<double, kPolyTerms> coeffs{};

  double predict(double d, double s) const;
};

// Least squares via column-pivoted Householder QR. Throws RankError when the
// feature matrix has rank < 10 (including fewer than 10 rows).
PolynomialModel fit_polynomial(const LatticeDataset& ds);
PolynomialModel fit_polynomial(const std::vector<std::array<double, 3>>& dsy);

// Coefficient of determination of the model on ds.
double r_squared(const PolynomialModel& model, const LatticeDataset& ds);

enum class TargetSource { Interpolated, Polynomial };

// Rows are parameterized by normalized index tau_i = i / (M - 1); n uniform
// tau values in [0, 1] are resampled with each column linearly interpolated
// against tau. Endpoints reproduce the first and last raw rows exactly.
// With TargetSource::Polynomial the yield stress is instead the model
// evaluated at the interpolated inputs.
LatticeDataset interpolate_dataset(const LatticeDataset& raw, std::size_t n = 1000);
LatticeDataset interpolate_dataset(const LatticeDataset& raw, std::size_t n, TargetSource targets,
                                   const PolynomialModel* model);

// Seeded Fisher-Yates shuffle of the row indices, then the first
// round(fraction * n) rows form the training set.
std::pair<LatticeDataset, LatticeDataset> train_test_split(const LatticeDataset& ds,
                                                           double train_fraction = 0.8,
                                                           std::uint64_t seed = 0);

// Index form shared with non-lattice sample sets.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n,
                                                                            double train_fraction,
                                                                            std::uint64_t seed);

}  // namespace tpinn::data
