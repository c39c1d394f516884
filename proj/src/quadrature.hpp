#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

namespace stratstab {

using cplx = std::complex<double>;

// 16-point Gauss-Legendre rule on [-1,1], nodes ascending.
struct GaussLegendre16 {
    static constexpr int n = 16;
    static const std::array<double, 16> x;
    static const std::array<double, 16> w;
};

struct QuadResult {
    cplx value{};
    double error = 0.0;  // accumulated panel-split estimate
    int panels = 0;
};

// Globally adaptive panel integration of an analytic complex integrand
// over [a,b]. Panels are split worst-error-first until the summed split
// estimate falls below max(abs_tol, rel_tol*|I|). Integrands with poles
// near the real segment (small Im(c)) are the expected hard case; the
// splitting concentrates panels around the near-singularity.
QuadResult integrate_adaptive(const std::function<cplx(double)>& f,
                              double a, double b,
                              double rel_tol = 1e-12, double abs_tol = 1e-14,
                              int max_panels = 4000);

// Fixed composite Gauss-Legendre grid over [a,b] with per-panel spectral
// prefix integration: nodal samples of f map to nodal samples of
// z -> int_a^z f. Within a panel the partial integral uses the cumulative
// integration matrix of the 16-node rule (exact through degree 15), so
// prefix values converge at the same rate as the panel rule itself.
class PanelGrid {
public:
    explicit PanelGrid(int npanels, double a = -1.0, double b = 1.0);

    int size() const { return static_cast<int>(nodes_.size()); }
    int npanels() const { return npanels_; }
    double a() const { return a_; }
    double b() const { return b_; }
    const std::vector<double>& nodes() const { return nodes_; }

    // out[i] = int_a^{z_i} f, total = int_a^b f
    void prefix(const std::vector<cplx>& f, std::vector<cplx>& out, cplx& total) const;
    cplx total(const std::vector<cplx>& f) const;

    // per-panel Lagrange interpolation of nodal data (barycentric form)
    cplx interpolate(const std::vector<cplx>& f, double z) const;

private:
    int npanels_;
    double a_, b_, panel_width_;
    std::vector<double> nodes_;
};

}  // namespace stratstab
