#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace stratstab {

// Abscissas/weights of the 16-point rule (symmetric, ascending).
const std::array<double, 16> GaussLegendre16::x = {
    -0.9894009349916499325962, -0.9445750230732325760780,
    -0.8656312023878317438805, -0.7554044083550030338951,
    -0.6178762444026437484467, -0.4580167776572273863424,
    -0.2816035507792589132304, -0.0950125098376374401853,
    0.0950125098376374401853,  0.2816035507792589132304,
    0.4580167776572273863424,  0.6178762444026437484467,
    0.7554044083550030338951,  0.8656312023878317438805,
    0.9445750230732325760780,  0.9894009349916499325962};

const std::array<double, 16> GaussLegendre16::w = {
    0.0271524594117540948518, 0.0622535239386478928628,
    0.0951585116824927848099, 0.1246289712555338720525,
    0.1495959888165767320815, 0.1691565193950025381893,
    0.1826034150449235888667, 0.1894506104550684962854,
    0.1894506104550684962854, 0.1826034150449235888667,
    0.1691565193950025381893, 0.1495959888165767320815,
    0.1246289712555338720525, 0.0951585116824927848099,
    0.0622535239386478928628, 0.0271524594117540948518};

namespace {

cplx gl16(const std::function<cplx(double)>& f, double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const double hw = 0.5 * (hi - lo);
    cplx s = 0.0;
    for (int i = 0; i < 16; ++i)
        s += GaussLegendre16::w[i] * f(mid + hw * GaussLegendre16::x[i]);
    return hw * s;
}

double legendre_p(int l, double t) {
    if (l == 0) return 1.0;
    double pm1 = 1.0, p = t;
    for (int k = 2; k <= l; ++k) {
        const double pn = ((2 * k - 1) * t * p - (k - 1) * pm1) / k;
        pm1 = p;
        p = pn;
    }
    return p;
}

// C[i][j] = int_{-1}^{x_i} L_j(t) dt on the reference panel, built from the
// Legendre expansion of the cardinal functions. Exact through degree 15,
// since the rule integrates degree <= 31.
std::array<std::array<double, 16>, 16> build_cumulative_matrix() {
    std::array<std::array<double, 16>, 16> C{};
    // coefficients of L_j: a_l = (2l+1)/2 * w_j * P_l(x_j)
    for (int j = 0; j < 16; ++j) {
        std::array<double, 16> a{};
        for (int l = 0; l < 16; ++l)
            a[l] = 0.5 * (2 * l + 1) * GaussLegendre16::w[j] *
                   legendre_p(l, GaussLegendre16::x[j]);
        for (int i = 0; i < 16; ++i) {
            const double xi = GaussLegendre16::x[i];
            // int_{-1}^{x} P_0 = x+1, int_{-1}^{x} P_l = (P_{l+1}-P_{l-1})/(2l+1)
            double s = a[0] * (xi + 1.0);
            for (int l = 1; l < 16; ++l)
                s += a[l] * (legendre_p(l + 1, xi) - legendre_p(l - 1, xi)) /
                     (2 * l + 1);
            C[i][j] = s;
        }
    }
    return C;
}

const std::array<std::array<double, 16>, 16>& cumulative_matrix() {
    static const auto C = build_cumulative_matrix();
    return C;
}

// barycentric weights of the 16 reference nodes
const std::array<double, 16>& bary_weights() {
    static const auto W = [] {
        std::array<double, 16> w{};
        for (int i = 0; i < 16; ++i) {
            double p = 1.0;
            for (int j = 0; j < 16; ++j)
                if (j != i) p *= (GaussLegendre16::x[i] - GaussLegendre16::x[j]);
            w[i] = 1.0 / p;
        }
        return w;
    }();
    return W;
}

struct Panel {
    double lo, hi;
    cplx value;   // refined (two-half) estimate
    double err;   // |two-half - whole|
};

struct PanelOrder {
    bool operator()(const Panel& a, const Panel& b) const { return a.err < b.err; }
};

Panel make_panel(const std::function<cplx(double)>& f, double lo, double hi) {
    const cplx whole = gl16(f, lo, hi);
    const double mid = 0.5 * (lo + hi);
    const cplx two = gl16(f, lo, mid) + gl16(f, mid, hi);
    return {lo, hi, two, std::abs(two - whole)};
}

}  // namespace

QuadResult integrate_adaptive(const std::function<cplx(double)>& f,
                              double a, double b,
                              double rel_tol, double abs_tol, int max_panels) {
    std::priority_queue<Panel, std::vector<Panel>, PanelOrder> queue;
    Panel p0 = make_panel(f, a, b);
    cplx total = p0.value;
    double total_err = p0.err;
    queue.push(p0);
    int npanels = 1;
    while (npanels < max_panels &&
           total_err > std::max(abs_tol, rel_tol * std::abs(total))) {
        Panel worst = queue.top();
        queue.pop();
        total -= worst.value;
        total_err -= worst.err;
        const double mid = 0.5 * (worst.lo + worst.hi);
        for (const Panel& child :
             {make_panel(f, worst.lo, mid), make_panel(f, mid, worst.hi)}) {
            total += child.value;
            total_err += child.err;
            queue.push(child);
        }
        ++npanels;
    }
    return {total, total_err, npanels};
}

PanelGrid::PanelGrid(int npanels, double a, double b)
    : npanels_(npanels), a_(a), b_(b), panel_width_((b - a) / npanels) {
    if (npanels < 1) throw std::invalid_argument("PanelGrid: npanels < 1");
    nodes_.reserve(16 * npanels);
    for (int p = 0; p < npanels; ++p) {
        const double lo = a + p * panel_width_;
        const double mid = lo + 0.5 * panel_width_;
        for (int i = 0; i < 16; ++i)
            nodes_.push_back(mid + 0.5 * panel_width_ * GaussLegendre16::x[i]);
    }
}

void PanelGrid::prefix(const std::vector<cplx>& f, std::vector<cplx>& out,
                       cplx& total) const {
    if (static_cast<int>(f.size()) != size())
        throw std::invalid_argument("PanelGrid::prefix: size mismatch");
    out.resize(f.size());
    const auto& C = cumulative_matrix();
    const double hw = 0.5 * panel_width_;
    cplx acc = 0.0;
    for (int p = 0; p < npanels_; ++p) {
        const cplx* fp = f.data() + 16 * p;
        cplx* op = out.data() + 16 * p;
        cplx full = 0.0;
        for (int i = 0; i < 16; ++i) {
            cplx s = 0.0;
            for (int j = 0; j < 16; ++j) s += C[i][j] * fp[j];
            op[i] = acc + hw * s;
            full += GaussLegendre16::w[i] * fp[i];
        }
        acc += hw * full;
    }
    total = acc;
}

cplx PanelGrid::total(const std::vector<cplx>& f) const {
    if (static_cast<int>(f.size()) != size())
        throw std::invalid_argument("PanelGrid::total: size mismatch");
    const double hw = 0.5 * panel_width_;
    cplx acc = 0.0;
    for (int p = 0; p < npanels_; ++p)
        for (int i = 0; i < 16; ++i)
            acc += hw * GaussLegendre16::w[i] * f[16 * p + i];
    return acc;
}

cplx PanelGrid::interpolate(const std::vector<cplx>& f, double z) const {
    int p = static_cast<int>((z - a_) / panel_width_);
    p = std::clamp(p, 0, npanels_ - 1);
    const double lo = a_ + p * panel_width_;
    const double t = 2.0 * (z - lo) / panel_width_ - 1.0;  // reference coord
    const auto& bw = bary_weights();
    cplx num = 0.0;
    double den = 0.0;
    for (int i = 0; i < 16; ++i) {
        const double d = t - GaussLegendre16::x[i];
        if (std::abs(d) < 1e-14) return f[16 * p + i];
        const double q = bw[i] / d;
        num += q * f[16 * p + i];
        den += q;
    }
    return num / den;
}

}  // namespace stratstab
