#include "avm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "avm/error.hpp"

namespace avm {
namespace {

const double kSqrt2 = std::sqrt(2.0);

double binomial(long t, int m) {
  if (m < 0 || m > t) return 0.0;
  double c = 1.0;
  for (int k = 1; k <= m; ++k) {
    c *= static_cast<double>(t - m + k) / k;
  }
  return c;
}

double max_abs(const Mat& x) { return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff(); }

// Induced infinity norm (max row sum).
double inf_norm(const Mat& x) {
  return x.size() == 0 ? 0.0 : x.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

std::string_view to_string(Regime regime) noexcept {
  switch (regime) {
    case Regime::ComplexConjugate: return "complex_conjugate";
    case Regime::DiagonalizableReal: return "diagonalizable_real";
    case Regime::RepeatedRootJordan: return "repeated_root_jordan";
  }
  return "unknown";
}

RegimeBoundaries regime_boundaries(double alpha, double beta) {
  RegimeBoundaries b;
  b.d1 = (3.0 - 2.0 * kSqrt2) * beta;
  b.d2 = (3.0 + 2.0 * kSqrt2) * beta;
  b.delta = alpha * alpha + beta * beta - 6.0 * alpha * beta;
  return b;
}

RegimeClassification classify_regime(double alpha, double beta,
                                     double boundary_tol) {
  RegimeClassification cls;
  cls.bounds = regime_boundaries(alpha, beta);
  cls.tolerance = boundary_tol * std::max(1.0, alpha * alpha + beta * beta);
  const double delta = cls.bounds.delta;
  if (std::abs(delta) <= cls.tolerance) {
    cls.regime = Regime::RepeatedRootJordan;
  } else if (delta < 0.0) {
    cls.regime = Regime::ComplexConjugate;
  } else {
    cls.regime = Regime::DiagonalizableReal;
  }
  return cls;
}

double reduced_characteristic(double alpha, double beta, double lambda) {
  const double u = lambda - 1.0;
  return u * u + u * (alpha + beta) + 2.0 * alpha * beta;
}

double characteristic_polynomial(const ModelParams& params, double lambda) {
  const int k = params.n() - 1;
  const double alpha = params.alpha();
  const double beta = params.beta();
  return std::pow(lambda - 1.0 + beta, k) * std::pow(lambda - 1.0 + alpha, k) *
         reduced_characteristic(alpha, beta, lambda);
}

std::vector<EigenEntry> EigenStructure::entries() const {
  std::vector<EigenEntry> out;
  if (n > 1) out.push_back({lambda1, n - 1});
  if (!complex_pair && lambda3 == lambda4) {
    out.push_back({lambda3, 2});
  } else {
    out.push_back({lambda3, 1});
  }
  if (n > 1) out.push_back({lambda2, n - 1});
  if (complex_pair || lambda3 != lambda4) out.push_back({lambda4, 1});
  return out;
}

std::complex<double> EigenStructure::trace() const {
  std::complex<double> s = 0.0;
  for (const auto& e : entries()) s += e.value * static_cast<double>(e.multiplicity);
  return s;
}

std::complex<double> EigenStructure::determinant() const {
  std::complex<double> p = 1.0;
  for (const auto& e : entries()) p *= std::pow(e.value, e.multiplicity);
  return p;
}

double EigenStructure::spectral_radius() const {
  double r = 0.0;
  for (const auto& e : entries()) r = std::max(r, std::abs(e.value));
  return r;
}

EigenStructure eigen_structure(const ModelParams& params,
                               const RegimeClassification& cls) {
  const double alpha = params.alpha();
  const double beta = params.beta();
  EigenStructure eig;
  eig.n = params.n();
  eig.lambda1 = 1.0 - alpha;
  eig.lambda2 = 1.0 - beta;
  const double centre = 1.0 - 0.5 * (alpha + beta);
  const double delta = cls.bounds.delta;
  switch (cls.regime) {
    case Regime::DiagonalizableReal: {
      const double half = 0.5 * std::sqrt(delta);
      eig.lambda3 = centre + half;
      eig.lambda4 = centre - half;
      break;
    }
    case Regime::RepeatedRootJordan:
      eig.lambda3 = centre;
      eig.lambda4 = centre;
      break;
    case Regime::ComplexConjugate: {
      const double half = 0.5 * std::sqrt(-delta);
      eig.lambda3 = {centre, half};
      eig.lambda4 = {centre, -half};
      eig.complex_pair = true;
      break;
    }
  }
  return eig;
}

// ---------------------------------------------------------------------------
// JordanForm

JordanForm::JordanForm(std::vector<Run> runs) : runs_(std::move(runs)) {
  dim_ = 0;
  for (const auto& r : runs_) dim_ += r.block_size * r.repeat;
}

JordanForm JordanForm::diagonal(const EigenStructure& eig) {
  const int k = eig.n - 1;
  std::vector<Run> runs;
  if (k > 0) runs.push_back({eig.lambda1, 1, k});
  runs.push_back({eig.lambda3.real(), 1, 1});
  if (k > 0) runs.push_back({eig.lambda2, 1, k});
  runs.push_back({eig.lambda4.real(), 1, 1});
  return JordanForm(std::move(runs));
}

JordanForm JordanForm::repeated(const EigenStructure& eig) {
  const int k = eig.n - 1;
  std::vector<Run> runs;
  if (k > 0) runs.push_back({eig.lambda1, 1, k});
  if (k > 0) runs.push_back({eig.lambda2, 1, k});
  runs.push_back({eig.lambda3.real(), 2, 1});
  return JordanForm(std::move(runs));
}

bool JordanForm::is_diagonal() const noexcept {
  return std::all_of(runs_.begin(), runs_.end(),
                     [](const Run& r) { return r.block_size == 1; });
}

Vec JordanForm::diagonal_entries() const {
  Vec d(dim_);
  int pos = 0;
  for (const auto& r : runs_) {
    const int len = r.block_size * r.repeat;
    d.segment(pos, len).setConstant(r.eigenvalue);
    pos += len;
  }
  return d;
}

Vec JordanForm::apply_power(long t, const Vec& v) const {
  Vec out(dim_);
  int pos = 0;
  for (const auto& r : runs_) {
    if (r.block_size == 1) {
      const double s = std::pow(r.eigenvalue, static_cast<double>(t));
      out.segment(pos, r.repeat) = s * v.segment(pos, r.repeat);
      pos += r.repeat;
      continue;
    }
    // J_r(l)^t = sum_m C(t, m) l^(t-m) N^m
    std::vector<double> coeff(r.block_size);
    for (int m = 0; m < r.block_size; ++m) {
      coeff[m] = m > t ? 0.0
                       : binomial(t, m) *
                             std::pow(r.eigenvalue, static_cast<double>(t - m));
    }
    for (int rep = 0; rep < r.repeat; ++rep) {
      for (int i = 0; i < r.block_size; ++i) {
        double acc = 0.0;
        for (int m = 0; i + m < r.block_size; ++m) acc += coeff[m] * v(pos + i + m);
        out(pos + i) = acc;
      }
      pos += r.block_size;
    }
  }
  return out;
}

Mat JordanForm::right_multiply(const Mat& x) const {
  Mat out(x.rows(), x.cols());
  int pos = 0;
  for (const auto& r : runs_) {
    for (int rep = 0; rep < r.repeat; ++rep) {
      for (int j = 0; j < r.block_size; ++j) {
        out.col(pos + j) = r.eigenvalue * x.col(pos + j);
        if (j > 0) out.col(pos + j) += x.col(pos + j - 1);
      }
      pos += r.block_size;
    }
  }
  return out;
}

Mat JordanForm::dense() const { return right_multiply(Mat::Identity(dim_, dim_)); }

// ---------------------------------------------------------------------------
// Basis

BasisScales basis_scales(const ModelParams& params,
                         const RegimeClassification& cls) {
  if (cls.regime != Regime::DiagonalizableReal) {
    throw Error(ErrorKind::WrongRegime,
                std::string("explicit basis requires the diagonalizable real "
                            "regime, got ") +
                    std::string(to_string(cls.regime)));
  }
  const double alpha = params.alpha();
  const double beta = params.beta();
  if (alpha == 0.0 || beta == 0.0) {
    throw Error(ErrorKind::DegenerateScale,
                "explicit basis needs alpha != 0 and beta != 0");
  }
  const double root = std::sqrt(cls.bounds.delta);
  BasisScales s;
  s.tau_minus = 2.0 / (beta - alpha - root);
  s.tau_plus = 2.0 / (beta - alpha + root);
  s.tau_tilde = alpha * (s.tau_minus - s.tau_plus);
  s.lower3 = -(beta - alpha - root) / (2.0 * alpha);
  s.lower4 = -(beta - alpha + root) / (2.0 * alpha);
  if (!std::isfinite(s.tau_minus) || !std::isfinite(s.tau_plus) ||
      s.tau_tilde == 0.0 || !std::isfinite(s.tau_tilde) ||
      s.lower4 - s.lower3 == 0.0) {
    throw Error(ErrorKind::DegenerateScale, "basis scale factors degenerate");
  }
  return s;
}

Mat build_basis(const ModelParams& params, const RegimeClassification& cls) {
  const int n = params.n();
  if (n < 2) {
    throw Error(ErrorKind::DimensionError, "explicit basis requires n >= 2");
  }
  const BasisScales s = basis_scales(params, cls);
  const Vec& a = params.a();
  const Vec& b = params.b();

  Mat q = Mat::Zero(2 * n, 2 * n);
  for (int i = 0; i < n - 1; ++i) {
    // (-b_{i+1}/b_1, e_i, 0): b.x = 0, y = 0
    q(0, i) = -b(i + 1) / b(0);
    q(i + 1, i) = 1.0;
    // (0, -a_{i+1}/a_1, e_i): x = 0, a.y = 0
    q(n, n + i) = -a(i + 1) / a(0);
    q(n + i + 1, n + i) = 1.0;
  }
  q.col(n - 1).head(n).setOnes();
  q.col(n - 1).tail(n).setConstant(s.lower3);
  q.col(2 * n - 1).head(n).setOnes();
  q.col(2 * n - 1).tail(n).setConstant(s.lower4);
  return q;
}

namespace {

// Inverse of the n x n block
//   [ -w_1^{-1} w_(-1)   1     ]
//   [  I_(n-1)           1 * s ]
// i.e. the first n-1 columns of an eigen block and a constant last column s.
void fill_block_inverse(const Vec& w, double s, Eigen::Ref<Mat> out) {
  const int n = static_cast<int>(w.size());
  out.setZero();
  for (int r = 0; r < n - 1; ++r) {
    out(r, 0) = -w(0);
    for (int c = 1; c < n; ++c) {
      out(r, c) = (r == c - 1 ? 1.0 : 0.0) - w(c);
    }
  }
  out(n - 1, 0) = w(0) / s;
  for (int c = 1; c < n; ++c) out(n - 1, c) = w(c) / s;
}

}  // namespace

Mat build_basis_inverse(const ModelParams& params,
                        const RegimeClassification& cls) {
  const int n = params.n();
  if (n < 2) {
    throw Error(ErrorKind::DimensionError, "explicit basis requires n >= 2");
  }
  const BasisScales s = basis_scales(params, cls);
  const double spread = s.lower4 - s.lower3;

  Mat qinv = Mat::Zero(2 * n, 2 * n);
  fill_block_inverse(params.b(), 1.0, qinv.block(0, 0, n, n));
  fill_block_inverse(params.a(), spread, qinv.block(n, n, n, n));

  // Undo the two column operations that made Q block diagonal:
  // col_2n -= col_n, then col_n += c col_2n with c = -lower3 / spread.
  const double c = -s.lower3 / spread;
  qinv.row(2 * n - 1) += c * qinv.row(n - 1);
  qinv.row(n - 1) -= qinv.row(2 * n - 1);
  return qinv;
}

SpectralDecomposition decompose(const ModelParams& params,
                                double boundary_tol) {
  SpectralDecomposition d;
  d.classification = classify_regime(params.alpha(), params.beta(), boundary_tol);
  d.eig = eigen_structure(params, d.classification);
  switch (d.classification.regime) {
    case Regime::DiagonalizableReal:
      d.jordan = JordanForm::diagonal(d.eig);
      break;
    case Regime::RepeatedRootJordan:
      d.jordan = JordanForm::repeated(d.eig);
      d.basis_note = "no explicit basis in the repeated-root regime";
      return d;
    case Regime::ComplexConjugate:
      d.basis_note = "M is not diagonalizable over the reals";
      return d;
  }
  if (params.n() < 2) {
    d.basis_note = "explicit basis requires n >= 2";
    return d;
  }
  try {
    d.scales = basis_scales(params, d.classification);
    d.Q = build_basis(params, d.classification);
    d.Qinv = build_basis_inverse(params, d.classification);
  } catch (const Error& e) {
    d.scales.reset();
    d.basis_note = e.what();
  }
  return d;
}

void require_basis(const SpectralDecomposition& decomp) {
  if (!decomp.has_basis() || !decomp.jordan.is_diagonal()) {
    std::string msg = "operation requires the explicit diagonal basis (regime ";
    msg += to_string(decomp.regime());
    if (!decomp.basis_note.empty()) msg += "; " + decomp.basis_note;
    msg += ")";
    throw Error(ErrorKind::WrongRegime, msg);
  }
}

VerificationReport verify_decomposition(const Mat& m, const JordanForm& j,
                                        const Mat& q, const Mat& qinv,
                                        double tol) {
  const auto dim = m.rows();
  if (dim < 4 || dim % 2 != 0 || m.cols() != dim || q.rows() != dim ||
      q.cols() != dim || qinv.rows() != dim || qinv.cols() != dim ||
      j.dim() != dim) {
    std::ostringstream os;
    os << "verification needs matching 2n x 2n matrices with n >= 2 (got M "
       << m.rows() << "x" << m.cols() << ", J " << j.dim() << ")";
    throw Error(ErrorKind::DimensionError, os.str());
  }
  VerificationReport r;
  r.tolerance = tol;
  r.m_norm = max_abs(m);
  r.mq_minus_qj = max_abs(m * q - j.right_multiply(q));
  r.q_qinv_minus_i = max_abs(q * qinv - Mat::Identity(dim, dim));
  r.qinv_m_q_minus_j = max_abs(qinv * m * q - j.dense());
  const double similarity_scale =
      std::max(1.0, r.m_norm) * std::max(1.0, inf_norm(q) * inf_norm(qinv));
  r.passed = std::isfinite(r.mq_minus_qj) && std::isfinite(r.q_qinv_minus_i) &&
             r.mq_minus_qj < tol * r.m_norm && r.q_qinv_minus_i < tol &&
             r.qinv_m_q_minus_j < tol * similarity_scale;
  return r;
}

}  // namespace avm
