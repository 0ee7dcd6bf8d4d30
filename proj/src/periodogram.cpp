#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <sstream>

#include "avm/cycle.hpp"
#include "avm/error.hpp"

namespace avm {
namespace {

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};
struct PlanDestroy {
  void operator()(fftw_plan_s* p) const noexcept { fftw_destroy_plan(p); }
};

template <class T>
std::unique_ptr<T, FftwFree> fftw_array(std::size_t count) {
  auto* raw = static_cast<T*>(fftw_malloc(sizeof(T) * count));
  if (raw == nullptr) throw std::bad_alloc();
  return std::unique_ptr<T, FftwFree>(raw);
}

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

// Running mean over 2m+1 bins, shrinking the window at the edges.
std::vector<double> daniell(const std::vector<double>& p, long m) {
  const long len = static_cast<long>(p.size());
  std::vector<double> prefix(p.size() + 1, 0.0);
  std::partial_sum(p.begin(), p.end(), prefix.begin() + 1);
  std::vector<double> out(p.size());
  for (long k = 0; k < len; ++k) {
    const long lo = std::max(0L, k - m);
    const long hi = std::min(len - 1, k + m);
    out[static_cast<std::size_t>(k)] =
        (prefix[static_cast<std::size_t>(hi + 1)] - prefix[static_cast<std::size_t>(lo)]) /
        static_cast<double>(hi - lo + 1);
  }
  return out;
}

}  // namespace

std::vector<double> periodogram(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 2) throw Error(ErrorKind::TooShort, "periodogram needs at least 2 samples");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) /
                      static_cast<double>(n);

  auto in = fftw_array<double>(n);
  auto out = fftw_array<fftw_complex>(n / 2 + 1);
  std::unique_ptr<fftw_plan_s, PlanDestroy> plan(fftw_plan_dft_r2c_1d(
      static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE));
  for (std::size_t i = 0; i < n; ++i) in.get()[i] = series[i] - mean;
  fftw_execute(plan.get());

  std::vector<double> p;
  p.reserve(n / 2);
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double re = out.get()[k][0];
    const double im = out.get()[k][1];
    p.push_back((re * re + im * im) / static_cast<double>(n));
  }
  return p;
}

PeriodEstimate dominant_period(const std::vector<double>& series) {
  const long n = static_cast<long>(series.size());
  if (n < kMinPeriodogramLength) {
    std::ostringstream os;
    os << "period estimate needs at least " << kMinPeriodogramLength
       << " samples, got " << n;
    throw Error(ErrorKind::TooShort, os.str());
  }
  const std::vector<double> p = periodogram(series);
  const auto peak = std::max_element(p.begin(), p.end());
  const long idx = peak - p.begin();  // bin k = idx + 1

  double shift = 0.0;
  if (idx > 0 && idx + 1 < static_cast<long>(p.size())) {
    const double ym = p[static_cast<std::size_t>(idx - 1)];
    const double y0 = *peak;
    const double yp = p[static_cast<std::size_t>(idx + 1)];
    const double denom = ym - 2.0 * y0 + yp;
    if (denom < 0.0) shift = std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
  }

  PeriodEstimate est;
  est.peak_bin = idx + 1;
  est.frequency = (static_cast<double>(idx + 1) + shift) / static_cast<double>(n);
  est.period = 1.0 / est.frequency;

  const long half_width = static_cast<long>(std::floor(std::sqrt(static_cast<double>(n)) / 2.0));
  const std::vector<double> smooth = daniell(p, half_width);
  const double med = median(smooth);
  const double top = *std::max_element(smooth.begin(), smooth.end());
  est.prominence = med > 0.0 ? top / med : 0.0;
  est.significant = est.prominence >= kProminenceThreshold;
  return est;
}

}  // namespace avm
