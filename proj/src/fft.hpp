#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

namespace stratstab {

// In-place radix-2 Cooley-Tukey transform, sign = -1 forward, +1 inverse.
// No normalization; callers scale. n must be a power of two.
inline void fft(std::complex<double>* a, int n, int sign) {
    if (n & (n - 1))
        throw std::invalid_argument("fft: length must be a power of two");
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * 3.141592653589793238462643383279502884 / len;
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            std::complex<double> w(1.0);
            for (int j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

}  // namespace stratstab
