#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace fedfft {

struct ComplexVector {
    std::vector<double> re;
    std::vector<double> im;

    ComplexVector() = default;
    explicit ComplexVector(std::size_t n) : re(n, 0.0), im(n, 0.0) {}

    std::size_t size() const noexcept { return re.size(); }
    std::complex<double> operator[](std::size_t i) const { return {re[i], im[i]}; }
};

/// O(N^2) reference transform: X(n) = sum_m x(m) exp(-2 pi i m n / N).
ComplexVector dft_naive(std::span<const double> x);

/// Discrete Fourier transform of any length N >= 1. Powers of two use an
/// iterative radix-2 kernel; other lengths go through Bluestein's chirp-z
/// reformulation on a zero-padded power-of-two convolution, so the data
/// itself is never padded.
ComplexVector fft(std::span<const double> x);

/// Complex in-place transform of any length. `inverse` flips the sign of the
/// exponent; no 1/N normalisation is applied in either direction.
void fft_inplace(std::vector<std::complex<double>>& data, bool inverse = false);

std::vector<double> magnitudes(const ComplexVector& x);

struct DensityEstimate {
    std::vector<double> grid;     // strictly ascending, uniform spacing
    std::vector<double> density;  // >= 0
    double bandwidth = 0.0;
};

/// 0.9 * min(sd, IQR / 1.34) * n^(-1/5). Falls back to sd when the IQR is
/// zero; returns 0 only when every value is identical.
double silverman_bandwidth(std::span<const double> sample);

/// Gaussian kernel density estimate on `grid_size` uniform points spanning
/// [min - 3h, max + 3h]. The estimate is built in the frequency domain: the
/// sample's empirical characteristic function is damped by the Gaussian
/// kernel's transform and brought back to a (possibly finer) internal grid
/// with one inverse FFT.
///
/// `bandwidth` overrides Silverman's rule when given. Throws DegenerateSample
/// when all values coincide (or fewer than two values are given).
DensityEstimate kde_density(std::span<const double> sample, std::size_t grid_size = 256,
                            std::optional<double> bandwidth = std::nullopt);

}  // namespace fedfft
