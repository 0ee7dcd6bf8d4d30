#pragma once

#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "avm/model.hpp"

namespace avm {

/// Relative tolerance on the discriminant for the repeated-root regime:
/// |delta| <= kBoundaryTol * max(1, alpha^2 + beta^2).
inline constexpr double kBoundaryTol = 1e-10;

struct RegimeBoundaries {
  double d1 = 0.0;     // (3 - 2 sqrt 2) beta
  double d2 = 0.0;     // (3 + 2 sqrt 2) beta
  double delta = 0.0;  // alpha^2 + beta^2 - 6 alpha beta
};

enum class Regime { ComplexConjugate, DiagonalizableReal, RepeatedRootJordan };

std::string_view to_string(Regime regime) noexcept;

struct RegimeClassification {
  RegimeBoundaries bounds;
  Regime regime = Regime::DiagonalizableReal;
  double tolerance = 0.0;  // absolute threshold applied to |delta|
};

RegimeBoundaries regime_boundaries(double alpha, double beta);

RegimeClassification classify_regime(double alpha, double beta,
                                     double boundary_tol = kBoundaryTol);

/// det(lambda I - M) in factored form
///   (lambda - 1 + beta)^(n-1) (lambda - 1 + alpha)^(n-1) g(lambda),
///   g(lambda) = (lambda - 1)^2 + (lambda - 1)(alpha + beta) + 2 alpha beta.
double characteristic_polynomial(const ModelParams& params, double lambda);

/// g(lambda) alone; its roots are lambda_3 and lambda_4.
double reduced_characteristic(double alpha, double beta, double lambda);

struct EigenEntry {
  std::complex<double> value;
  int multiplicity = 0;
};

struct EigenStructure {
  double lambda1 = 0.0;  // 1 - alpha, multiplicity n - 1
  double lambda2 = 0.0;  // 1 - beta, multiplicity n - 1
  std::complex<double> lambda3;
  std::complex<double> lambda4;
  bool complex_pair = false;
  int n = 0;

  /// (lambda1, lambda3, lambda2, lambda4) with their multiplicities; a
  /// repeated pair is reported once with multiplicity 2.
  std::vector<EigenEntry> entries() const;
  std::complex<double> trace() const;
  std::complex<double> determinant() const;
  double spectral_radius() const;
};

EigenStructure eigen_structure(const ModelParams& params,
                               const RegimeClassification& cls);

/// Block-diagonal Jordan form, stored as (eigenvalue, block size, repeat)
/// runs. Never materialized densely outside verification.
class JordanForm {
 public:
  struct Run {
    double eigenvalue = 0.0;
    int block_size = 1;
    int repeat = 1;
  };

  JordanForm() = default;
  explicit JordanForm(std::vector<Run> runs);

  /// diag{l1 I_(n-1), l3, l2 I_(n-1), l4}
  static JordanForm diagonal(const EigenStructure& eig);
  /// diag{l1 I_(n-1), l2 I_(n-1), J_2(l3)}
  static JordanForm repeated(const EigenStructure& eig);

  const std::vector<Run>& runs() const noexcept { return runs_; }
  int dim() const noexcept { return dim_; }
  bool is_diagonal() const noexcept;
  bool empty() const noexcept { return runs_.empty(); }

  /// Diagonal entries expanded to length dim().
  Vec diagonal_entries() const;
  /// J^t applied to a vector, blockwise.
  Vec apply_power(long t, const Vec& v) const;
  /// X J (column scaling for diagonal runs).
  Mat right_multiply(const Mat& x) const;
  Mat dense() const;

 private:
  std::vector<Run> runs_;
  int dim_ = 0;
};

/// Entries of the lambda_3 / lambda_4 basis columns. The lambda_3 column
/// is (1_n, lower3 1_n), the lambda_4 column is (1_n, lower4 1_n).
struct BasisScales {
  double tau_minus = 0.0;  // 2 / (beta - alpha - sqrt(delta))
  double tau_plus = 0.0;   // 2 / (beta - alpha + sqrt(delta))
  double tau_tilde = 0.0;  // alpha (tau_minus - tau_plus)
  double lower3 = 0.0;     // -(beta - alpha - sqrt(delta)) / (2 alpha)
  double lower4 = 0.0;     // -(beta - alpha + sqrt(delta)) / (2 alpha)
};

/// Requires the diagonalizable regime, alpha != 0 and beta != 0.
BasisScales basis_scales(const ModelParams& params,
                         const RegimeClassification& cls);

/// Eigenvector basis Q with columns ordered as J: lambda_1 block, lambda_3,
/// lambda_2 block, lambda_4.
Mat build_basis(const ModelParams& params, const RegimeClassification& cls);

/// Q^{-1} assembled from its two n x n diagonal blocks followed by two
/// elementary row operations. O(n^2); no dense factorization.
Mat build_basis_inverse(const ModelParams& params,
                        const RegimeClassification& cls);

struct SpectralDecomposition {
  RegimeClassification classification;
  EigenStructure eig;
  JordanForm jordan;  // empty in the complex-conjugate regime
  std::optional<Mat> Q;
  std::optional<Mat> Qinv;
  std::optional<BasisScales> scales;
  std::string basis_note;  // why Q is absent, when it is

  Regime regime() const noexcept { return classification.regime; }
  bool has_basis() const noexcept { return Q.has_value(); }
};

/// Classification, eigenvalues, Jordan structure, and Q / Q^{-1} whenever
/// the explicit basis exists.
SpectralDecomposition decompose(const ModelParams& params,
                                double boundary_tol = kBoundaryTol);

/// Throws WrongRegime unless decomp carries Q and Q^{-1}.
void require_basis(const SpectralDecomposition& decomp);

struct VerificationReport {
  double mq_minus_qj = 0.0;        // ||MQ - QJ||_max
  double q_qinv_minus_i = 0.0;     // ||Q Q^{-1} - I||_max
  double qinv_m_q_minus_j = 0.0;   // ||Q^{-1} M Q - J||_max
  double m_norm = 0.0;             // ||M||_max
  double tolerance = 0.0;
  bool passed = false;
};

/// Residuals are measured, never thrown. Throws DimensionError when the
/// matrices are not 2n x 2n with n >= 2.
VerificationReport verify_decomposition(const Mat& m, const JordanForm& j,
                                        const Mat& q, const Mat& qinv,
                                        double tol);

}  // namespace avm
