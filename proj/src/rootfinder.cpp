#include "rootfinder.hpp"

#include <algorithm>
#include <cmath>
#include <list>
#include <numbers>

namespace stratstab {

namespace {

constexpr double kPi = std::numbers::pi;

struct ParamContour {
    std::function<cplx(double)> map;  // t in [0,1] -> contour point, map(1)=map(0)
    std::vector<double> initial_t;    // ascending, first must be 0
};

ParamContour halfdisk_contour(const HalfDiskContour& hd) {
    ParamContour pc;
    const double eps = hd.eps, R = hd.radius;
    pc.map = [eps, R](double t) -> cplx {
        if (t <= 0.5) {
            const double x = -R + 4.0 * t * R;  // base, left to right
            return {x, eps};
        }
        const double th = (t - 0.5) * 2.0 * kPi;  // arc angle 0..pi
        return cplx(0.0, eps) + R * std::exp(cplx(0.0, th));
    };
    for (int i = 0; i < hd.n_base; ++i)
        pc.initial_t.push_back(0.5 * i / hd.n_base);
    for (int i = 0; i < hd.n_arc; ++i)
        pc.initial_t.push_back(0.5 + 0.5 * i / hd.n_arc);
    return pc;
}

ParamContour rect_contour(const Rect& r, int per_edge) {
    ParamContour pc;
    pc.map = [r](double t) -> cplx {
        const double s = 4.0 * t;
        if (s <= 1.0) return {r.re_lo + s * (r.re_hi - r.re_lo), r.im_lo};
        if (s <= 2.0) return {r.re_hi, r.im_lo + (s - 1.0) * (r.im_hi - r.im_lo)};
        if (s <= 3.0) return {r.re_hi - (s - 2.0) * (r.re_hi - r.re_lo), r.im_hi};
        return {r.re_lo, r.im_hi - (s - 3.0) * (r.im_hi - r.im_lo)};
    };
    for (int e = 0; e < 4; ++e)
        for (int i = 0; i < per_edge; ++i)
            pc.initial_t.push_back(0.25 * e + 0.25 * i / per_edge);
    return pc;
}

struct Node {
    double t;
    cplx c, f;
};

WindingReport wind_on(const CFunc& f, const ParamContour& pc, int max_samples) {
    std::list<Node> pts;
    std::vector<double> mags;
    for (double t : pc.initial_t) {
        const cplx c = pc.map(t);
        const cplx v = f(c);
        pts.push_back({t, c, v});
        mags.push_back(std::abs(v));
    }
    std::vector<double> sorted = mags;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double floor = 1e-13 * sorted[sorted.size() / 2];
    auto check = [floor](const Node& n) {
        if (std::abs(n.f) < floor)
            throw Error(Err::ZeroOnContour, "winding_number: |f| ~ 0 on the contour");
    };
    for (const Node& n : pts) check(n);
    // sentinel closing the loop at t = 1
    pts.push_back({1.0, pts.front().c, pts.front().f});

    int count = static_cast<int>(pts.size());
    auto it = pts.begin();
    auto next = std::next(it);
    while (next != pts.end()) {
        const double dphase = std::arg(next->f / it->f);
        if (std::abs(dphase) >= 0.5 * kPi) {
            if (count >= max_samples)
                throw Error(Err::RefinementExhausted,
                            "winding_number: sample budget exhausted before phase "
                            "steps dropped below pi/2");
            const double tm = 0.5 * (it->t + next->t);
            const cplx cm = pc.map(tm);
            // a phase jump that survives down to the resolution of the
            // contour points is a zero crossing in working precision
            if (std::abs(next->c - it->c) <
                1e-13 * std::max(1.0, std::abs(it->c)))
                throw Error(Err::ZeroOnContour,
                            "winding_number: unresolvable phase jump on the contour");
            Node mid{tm, cm, f(cm)};
            check(mid);
            next = pts.insert(next, mid);
            ++count;
            continue;
        }
        ++it;
        ++next;
    }

    WindingReport rep;
    double total = 0.0;
    for (it = pts.begin(), next = std::next(it); next != pts.end(); ++it, ++next) {
        const double dphase = std::arg(next->f / it->f);
        total += dphase;
        rep.max_phase_step = std::max(rep.max_phase_step, std::abs(dphase));
        rep.samples.emplace_back(it->c, it->f);
    }
    rep.winding = static_cast<int>(std::llround(total / (2.0 * kPi)));
    return rep;
}

// complex secant iteration toward f = 0
bool secant_refine(const CFunc& f, cplx c0, cplx c1, double tol, Zero& out,
                   int itmax = 80) {
    cplx f0 = f(c0), f1 = f(c1);
    for (int i = 0; i < itmax; ++i) {
        if (std::abs(f1) < tol) {
            out.c = c1;
            out.residual = std::abs(f1);
            out.iterations = i;
            return true;
        }
        const cplx df = f1 - f0;
        if (df == cplx(0.0)) break;
        const cplx c2 = c1 - f1 * (c1 - c0) / df;
        c0 = c1;
        f0 = f1;
        c1 = c2;
        if (!(c1.imag() > 0.0)) c1 = {c1.real(), std::abs(c1.imag()) + 1e-12};
        f1 = f(c1);
    }
    return false;
}

}  // namespace

double Rect::diameter() const { return std::hypot(re_hi - re_lo, im_hi - im_lo); }

cplx nyquist_F(cplx c, const ShearProfile& shear, double rel_tol) {
    if (c.imag() == 0.0)
        throw Error(Err::BranchViolation, "nyquist_F: Im(c) must be nonzero");
    auto f = [&shear, c](double z) {
        const cplx w = shear.eval(z) - c;
        return 1.0 / (w * w);
    };
    return integrate_adaptive(f, -1.0, 1.0, rel_tol).value;
}

WindingReport winding_number(const CFunc& f, const HalfDiskContour& contour,
                             int max_samples) {
    return wind_on(f, halfdisk_contour(contour), max_samples);
}

WindingReport winding_number(const CFunc& f, const Rect& rect, int samples_per_edge,
                             int max_samples) {
    return wind_on(f, rect_contour(rect, samples_per_edge), max_samples);
}

namespace {

// winding on a cell with deterministic outward jitter on ZeroOnContour; the
// rect actually used (possibly expanded) is reported back so the recursion
// keeps its split lines off the offending point
int cell_winding(const CFunc& f, Rect& r, const FindZerosOptions& opt, bool& jittered) {
    jittered = false;
    for (int attempt = 0;; ++attempt) {
        try {
            return wind_on(f, rect_contour(r, opt.samples_per_edge), opt.max_samples)
                .winding;
        } catch (const Error& e) {
            if (e.code() != Err::ZeroOnContour || attempt >= opt.max_jitters) {
                char buf[160];
                std::snprintf(buf, sizeof buf,
                              " [cell (%.6g,%.6g)x(%.6g,%.6g), attempt %d]", r.re_lo,
                              r.re_hi, r.im_lo, r.im_hi, attempt);
                throw Error(e.code(), e.what() + std::string(buf));
            }
            jittered = true;
            // asymmetric expansion so midlines of later splits move as well
            const double dre = (r.re_hi - r.re_lo) * 1e-3 * (attempt + 1);
            const double dim = (r.im_hi - r.im_lo) * 1e-3 * (attempt + 1);
            r.re_lo -= dre;
            r.re_hi += 1.618 * dre;
            r.im_hi += dim;
            r.im_lo = std::max(0.25 * r.im_lo, r.im_lo - 1.618 * dim);
        }
    }
}

void subdivide(const CFunc& f, const Rect& cell, int winding, double tol,
               const FindZerosOptions& opt, std::vector<Zero>& out) {
    if (winding == 0) return;
    if (cell.diameter() < opt.cell_diameter) {
        Zero z;
        const cplx ctr = cell.center();
        const double off = 1e-4 * cell.diameter();
        if (!secant_refine(f, ctr, ctr + cplx(off, off), tol, z))
            throw Error(Err::RefinementExhausted,
                        "find_zeros: secant failed to reach tolerance from cell");
        z.multiplicity_hint = winding;
        out.push_back(z);
        return;
    }
    const double rm = 0.5 * (cell.re_lo + cell.re_hi);
    const double im = 0.5 * (cell.im_lo + cell.im_hi);
    Rect children[4] = {{cell.re_lo, rm, cell.im_lo, im},
                        {rm, cell.re_hi, cell.im_lo, im},
                        {cell.re_lo, rm, im, cell.im_hi},
                        {rm, cell.re_hi, im, cell.im_hi}};
    int sum = 0;
    bool any_jitter = false;
    int child_w[4];
    for (int i = 0; i < 4; ++i) {
        bool j;
        child_w[i] = cell_winding(f, children[i], opt, j);
        any_jitter |= j;
        sum += child_w[i];
    }
    if (opt.check_conservation && !any_jitter && sum != winding)
        throw std::logic_error("find_zeros: winding not conserved under subdivision");
    for (int i = 0; i < 4; ++i) subdivide(f, children[i], child_w[i], tol, opt, out);
}

}  // namespace

std::vector<Zero> find_zeros(const CFunc& f, const Rect& region, double tol,
                             const FindZerosOptions& opt) {
    if (!(region.im_lo > 0.0))
        throw Error(Err::InvalidArgument, "find_zeros: region must satisfy Im > 0");
    bool jittered;
    Rect reg = region;
    const int w = cell_winding(f, reg, opt, jittered);
    std::vector<Zero> raw;
    subdivide(f, reg, w, tol, opt, raw);
    // dedupe zeros closer than 10*tol (neighbouring cells may converge to one)
    std::vector<Zero> out;
    for (const Zero& z : raw) {
        bool dup = false;
        for (const Zero& kept : out)
            if (std::abs(kept.c - z.c) < 10.0 * tol) {
                dup = true;
                break;
            }
        if (!dup) out.push_back(z);
    }
    std::sort(out.begin(), out.end(),
              [](const Zero& a, const Zero& b) { return a.c.imag() > b.c.imag(); });
    return out;
}

double exclusion_radius(const ShearProfile& shear) {
    const double s = shear.sup_norm;
    auto ok = [s](double R) {
        const double u = 1.0 - s / R;
        return s * u * u > 1.0 - u * u;
    };
    double lo = s * (1.0 + 1e-9), hi = std::max(4.0, 4.0 * s);
    while (!ok(hi)) hi *= 2.0;
    while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

DispersionZeros find_dispersion_zeros(const StratifiedEquilibrium& eq, double kappa,
                                      ZeroMethod method, double eps_floor, double tol) {
    const double R = exclusion_radius(eq.shear);
    DispersionQuery q;
    q.eq = eq;
    q.kappa = kappa;
    CFunc f;
    if (method == ZeroMethod::Neumann) {
        f = [q](cplx c) mutable {
            q.c = c;
            return solve_neumann(q).psi_end;
        };
    } else {
        auto kernel = std::make_shared<ShootingKernel>(eq, kappa);
        f = [kernel](cplx c) { return kernel->value(c); };
    }
    const Rect region{-R, R, eps_floor, R};
    DispersionZeros res;
    res.zeros = find_zeros(f, region, tol);
    for (const Zero& z : res.zeros) res.gamma0 = std::max(res.gamma0, z.c.imag());
    return res;
}

double gamma0(const StratifiedEquilibrium& eq, double eps_floor, double tol) {
    DispersionZeros res =
        find_dispersion_zeros(eq, 0.0, ZeroMethod::Neumann, eps_floor, tol);
    if (res.zeros.empty())
        throw Error(Err::NoZeroFound,
                    "gamma0: no dispersion zeros above the search floor");
    return res.gamma0;
}

NecessaryConditions verify_necessary_conditions(const Zero& z,
                                                const StratifiedEquilibrium& eq) {
    NecessaryConditions out;
    double lo = eq.shear.eval(-1.0), hi = eq.shear.eval(1.0);
    if (lo > hi) std::swap(lo, hi);
    out.g1_pass = z.c.real() >= lo && z.c.real() <= hi;
    out.flagged_spurious = miles_howard_check(eq, 1000).miles_howard_satisfied;
    return out;
}

PlemeljReport plemelj_scan(const ShearProfile& shear, double eps, int n_samples) {
    PlemeljReport rep;
    rep.segment_halfwidth = shear.sup_norm - std::max(50.0 * eps, 0.01);
    if (rep.segment_halfwidth <= 0.0)
        throw Error(Err::InvalidArgument, "plemelj_scan: eps too large for the profile");
    std::vector<double> a(n_samples), im(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        a[i] = -rep.segment_halfwidth +
               2.0 * rep.segment_halfwidth * i / (n_samples - 1);
        im[i] = nyquist_F(cplx(a[i], eps), shear, 1e-11).imag();
    }
    for (int i = 1; i < n_samples; ++i) {
        if ((im[i - 1] < 0.0) != (im[i] < 0.0)) {
            ++rep.sign_changes;
            const double t = im[i - 1] / (im[i - 1] - im[i]);
            rep.crossing = a[i - 1] + t * (a[i] - a[i - 1]);
            rep.slope_at_crossing = (im[i] - im[i - 1]) / (a[i] - a[i - 1]);
            rep.upward = im[i - 1] < 0.0 && im[i] > 0.0;
        }
    }
    return rep;
}

}  // namespace stratstab
