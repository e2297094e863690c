#include "fedfft/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fedfft/error.hpp"

namespace fedfft {

namespace {

using cplx = std::complex<double>;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void radix2(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n <= 1) return;

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    // Twiddles are evaluated directly rather than by recurrence to keep the
    // per-bin error near machine precision.
    const double sign = inverse ? 1.0 : -1.0;
    std::vector<cplx> twiddle(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        twiddle[k] = {std::cos(angle), std::sin(angle)};
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n / len;
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                cplx u = a[start + k];
                cplx v = a[start + k + half] * twiddle[k * stride];
                a[start + k] = u + v;
                a[start + k + half] = u - v;
            }
        }
    }
}

void bluestein(std::vector<cplx>& a, bool inverse) {
    const std::size_t n = a.size();
    const std::size_t m = next_power_of_two(2 * n - 1);
    const double sign = inverse ? 1.0 : -1.0;

    // chirp[k] = exp(sign * i * pi * k^2 / n); k^2 is reduced mod 2n first so
    // the angle stays small and exact.
    std::vector<cplx> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        auto k2 = static_cast<unsigned long long>(k) * k % (2ULL * n);
        double angle = sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
        chirp[k] = {std::cos(angle), std::sin(angle)};
    }

    std::vector<cplx> x(m), y(m);
    for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * chirp[k];
    y[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) {
        y[k] = std::conj(chirp[k]);
        y[m - k] = std::conj(chirp[k]);
    }

    radix2(x, false);
    radix2(y, false);
    for (std::size_t k = 0; k < m; ++k) x[k] *= y[k];
    radix2(x, true);

    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * inv_m * chirp[k];
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    double pos = q * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = std::min(lo + 1, sorted.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Upper bound on the internal transform length; a larger requirement means
// the bandwidth is vanishingly small against the sample's spread.
constexpr std::size_t kMaxInternalLength = std::size_t{1} << 23;

}  // namespace

ComplexVector dft_naive(std::span<const double> x) {
    const std::size_t n = x.size();
    ComplexVector out(n);
    std::vector<double> c(n), sn(n);
    for (std::size_t p = 0; p < n; ++p) {
        double angle = -2.0 * std::numbers::pi * static_cast<double>(p) / static_cast<double>(n);
        c[p] = std::cos(angle);
        sn[p] = std::sin(angle);
    }
    for (std::size_t k = 0; k < n; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            auto phase = static_cast<unsigned long long>(m) * k % n;
            re += x[m] * c[phase];
            im += x[m] * sn[phase];
        }
        out.re[k] = re;
        out.im[k] = im;
    }
    return out;
}

void fft_inplace(std::vector<cplx>& data, bool inverse) {
    if (data.size() <= 1) return;
    if (is_power_of_two(data.size())) {
        radix2(data, inverse);
    } else {
        bluestein(data, inverse);
    }
}

ComplexVector fft(std::span<const double> x) {
    std::vector<cplx> data(x.begin(), x.end());
    fft_inplace(data, false);
    ComplexVector out(data.size());
    for (std::size_t k = 0; k < data.size(); ++k) {
        out.re[k] = data[k].real();
        out.im[k] = data[k].imag();
    }
    return out;
}

std::vector<double> magnitudes(const ComplexVector& x) {
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = std::hypot(x.re[k], x.im[k]);
    return out;
}

double silverman_bandwidth(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 2) return 0.0;

    double mean = 0.0;
    for (double v : sample) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : sample) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / static_cast<double>(n - 1));

    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);

    double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

DensityEstimate kde_density(std::span<const double> sample, std::size_t grid_size, std::optional<double> bandwidth) {
    if (grid_size < 2) throw Error(ErrorCode::InvalidArgument, "kde grid needs at least two points");
    if (sample.size() < 2) throw Error(ErrorCode::DegenerateSample, "kde needs at least two values");
    auto [min_it, max_it] = std::minmax_element(sample.begin(), sample.end());
    const double lo_value = *min_it;
    const double hi_value = *max_it;
    if (!(hi_value > lo_value)) throw Error(ErrorCode::DegenerateSample, "all sample values are identical");

    const double h = bandwidth.value_or(silverman_bandwidth(sample));
    if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");

    DensityEstimate est;
    est.bandwidth = h;
    const double lo = lo_value - 3.0 * h;
    const double hi = hi_value + 3.0 * h;
    const double step = (hi - lo) / static_cast<double>(grid_size - 1);
    est.grid.resize(grid_size);
    for (std::size_t j = 0; j < grid_size; ++j) est.grid[j] = lo + step * static_cast<double>(j);
    est.grid.back() = hi;

    // Internal spacing <= h/3 puts the kernel transform at Nyquist below
    // exp(-44); a 12h margin on the period makes wrap-around negligible.
    const auto refine = static_cast<std::size_t>(std::max(1.0, std::ceil(step / (h / 3.0))));
    const double fine_step = step / static_cast<double>(refine);
    const double needed = std::ceil((hi - lo + 12.0 * h) / fine_step) + 1.0;
    if (needed > static_cast<double>(kMaxInternalLength)) {
        throw Error(ErrorCode::InvalidArgument, "bandwidth too small relative to the sample span");
    }
    const std::size_t length = next_power_of_two(static_cast<std::size_t>(needed));
    const double period = fine_step * static_cast<double>(length);
    const double d_omega = 2.0 * std::numbers::pi / period;
    const double inv_n = 1.0 / static_cast<double>(sample.size());

    // Damped empirical characteristic function at omega_k = k * d_omega,
    // positions measured from `lo`. Negative frequencies are conjugates.
    const std::size_t half = length / 2;
    std::vector<cplx> spectrum(length);
    for (double x : sample) {
        const double offset = x - lo;
        const cplx step_phase = std::polar(1.0, -d_omega * offset);
        cplx phase{1.0, 0.0};
        for (std::size_t k = 0; k <= half; ++k) {
            if (k % 64 == 0) phase = std::polar(1.0, -d_omega * offset * static_cast<double>(k));
            spectrum[k] += phase;
            phase *= step_phase;
        }
    }
    for (std::size_t k = 0; k <= half; ++k) {
        const double omega = d_omega * static_cast<double>(k);
        spectrum[k] *= inv_n * std::exp(-0.5 * omega * omega * h * h);
    }
    spectrum[half] = spectrum[half].real();
    for (std::size_t k = 1; k < half; ++k) spectrum[length - k] = std::conj(spectrum[k]);

    fft_inplace(spectrum, true);

    est.density.resize(grid_size);
    const double inv_period = 1.0 / period;
    for (std::size_t j = 0; j < grid_size; ++j) {
        est.density[j] = std::max(0.0, spectrum[j * refine].real() * inv_period);
    }
    return est;
}

}  // namespace fedfft
