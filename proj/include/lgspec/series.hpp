#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgspec {

/// Raised for malformed or inconsistent input data (CSV parsing, bad values).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Transform { raw, log_return };

std::string to_string(Transform t);
Transform transform_from_string(const std::string& s);

/// d aligned real-valued columns of common length n, stored n x d.
struct MultivariateSeries {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
  std::string source;
  Transform transform = Transform::raw;

  Eigen::Index size() const { return values.rows(); }
  Eigen::Index dims() const { return values.cols(); }
  Eigen::Index column_index(const std::string& name) const;
  auto column(Eigen::Index k) const { return values.col(k); }
};

/// Columns mapped through Phi^{-1}(rank / (n + 1)).
struct PseudoNormalizedSeries {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
  std::string rank_method = "rank/(n+1), ties by time index";

  Eigen::Index size() const { return values.rows(); }
  Eigen::Index dims() const { return values.cols(); }
  auto column(Eigen::Index k) const { return values.col(k); }
};

enum class PairOrder { kl, lk };

/// Rows are (first_{t+h}, second_t) for t = 0 .. n-h-1.
struct LagPairSet {
  Eigen::Matrix<double, Eigen::Dynamic, 2> pairs;
  Eigen::Index lag = 0;
  PairOrder order = PairOrder::kl;

  Eigen::Index size() const { return pairs.rows(); }
};

/// Reads the named columns from a CSV file with a header row. Any row with a
/// non-numeric or missing cell is rejected with its 1-based data row index.
MultivariateSeries load_csv(const std::filesystem::path& path,
                            const std::vector<std::string>& columns,
                            char delimiter = ',');

void write_csv(const std::filesystem::path& path,
               const MultivariateSeries& series, char delimiter = ',');

MultivariateSeries log_returns(const MultivariateSeries& series);

/// Standard normal quantile function.
double normal_quantile(double p);
double normal_cdf(double x);

Eigen::VectorXd pseudo_normalize(const Eigen::Ref<const Eigen::VectorXd>& column);
PseudoNormalizedSeries pseudo_normalize(const MultivariateSeries& series);

LagPairSet lag_pairs(const Eigen::Ref<const Eigen::VectorXd>& first,
                     const Eigen::Ref<const Eigen::VectorXd>& second,
                     Eigen::Index h, PairOrder order = PairOrder::kl);

}  // namespace lgspec
