#ifndef SELFORG_ANALYSIS_HPP
#define SELFORG_ANALYSIS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

#include "selforg/geometry.hpp"
#include "selforg/greens.hpp"
#include "selforg/params.hpp"

namespace selforg {

// --- dimerization order parameter ------------------------------------------
// Signed alternation of nearest-neighbour coherent couplings |J_{n,n+1}|.
// Positive when the outermost bonds are the strong ones, negative when the
// chain ends on weak bonds (isolated edge sites).

inline double dimer_strength_from_abs_couplings(const std::vector<double>& j) {
    const auto bonds = j.size();
    if (bonds < 2) throw ConfigError("dimer strength needs at least two bonds");
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < bonds; ++k) {
        const double num = j[k + 1] - j[k];
        const double den = j[k + 1] + j[k];
        if (den == 0.0) throw NumericalError("degenerate couplings in dimer strength");
        const double term = num / den;
        acc += (k % 2 == 0) ? -term : term;
    }
    return acc / static_cast<double>(bonds - 1);
}

namespace detail {

inline std::vector<int> x_order(const Positions& pos) {
    std::vector<int> idx(static_cast<std::size_t>(pos.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return pos(a, 0) < pos(b, 0); });
    return idx;
}

} // namespace detail

inline double dimer_strength(const Positions& pos, const Vec3c& d) {
    if (pos.rows() < 3) throw ConfigError("dimer strength needs at least three atoms");
    const auto idx = detail::x_order(pos);
    std::vector<double> j;
    j.reserve(idx.size() - 1);
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        const Eigen::Vector3d r(pos(idx[k + 1], 0) - pos(idx[k], 0),
                                pos(idx[k + 1], 1) - pos(idx[k], 1), 0.0);
        j.push_back(std::abs(std::real(coupling(r, d))));
    }
    return dimer_strength_from_abs_couplings(j);
}

// --- chain lattice classification -------------------------------------------

enum class ChainPattern { Uniform, Dimerized, Other };

inline const char* chain_pattern_name(ChainPattern k) {
    switch (k) {
        case ChainPattern::Uniform: return "uniform";
        case ChainPattern::Dimerized: return "dimerized";
        default: return "other";
    }
}

struct ChainClassification {
    ChainPattern kind = ChainPattern::Other;
    double mean_gap = 0.0;
    double gap_std = 0.0;         // std of all gaps
    double a1_mean = 0.0;         // gaps 0, 2, 4, ... in x order
    double a2_mean = 0.0;         // gaps 1, 3, 5, ...
    double alternating_std = 0.0; // residual after removing the two-value pattern
};

inline ChainClassification classify_gaps(const std::vector<double>& gaps) {
    if (gaps.size() < 3) throw ConfigError("classification needs at least three gaps");
    ChainClassification r;
    const auto n = static_cast<double>(gaps.size());
    r.mean_gap = std::accumulate(gaps.begin(), gaps.end(), 0.0) / n;
    double var = 0.0;
    for (double g : gaps) var += (g - r.mean_gap) * (g - r.mean_gap);
    r.gap_std = std::sqrt(var / n);

    double s1 = 0.0, s2 = 0.0;
    int n1 = 0, n2 = 0;
    for (std::size_t i = 0; i < gaps.size(); ++i)
        (i % 2 == 0 ? (s1 += gaps[i], ++n1) : (s2 += gaps[i], ++n2));
    r.a1_mean = s1 / n1;
    r.a2_mean = s2 / n2;
    double res = 0.0;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        const double c = (i % 2 == 0) ? r.a1_mean : r.a2_mean;
        res += (gaps[i] - c) * (gaps[i] - c);
    }
    r.alternating_std = std::sqrt(res / n);

    const double contrast = std::abs(r.a1_mean - r.a2_mean);
    if (r.gap_std < 0.02 * r.mean_gap)
        r.kind = ChainPattern::Uniform;
    else if (contrast > 0.05 * r.mean_gap && r.alternating_std < 0.5 * contrast)
        r.kind = ChainPattern::Dimerized;
    else
        r.kind = ChainPattern::Other;
    return r;
}

inline ChainClassification classify_chain(const Positions& pos) {
    const auto idx = detail::x_order(pos);
    if (idx.size() < 4) throw ConfigError("classification needs at least four atoms");
    std::vector<double> gaps;
    gaps.reserve(idx.size() - 1);
    for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
        const double dx = pos(idx[k + 1], 0) - pos(idx[k], 0);
        const double dy = pos(idx[k + 1], 1) - pos(idx[k], 1);
        gaps.push_back(std::hypot(dx, dy));
    }
    return classify_gaps(gaps);
}

inline Positions dimerized_chain_positions(int n, double a1, double a2) {
    if (n < 2) throw ConfigError("chain needs at least two atoms");
    Positions pos(n, 2);
    double x = 0.0;
    for (int i = 0; i < n; ++i) {
        pos(i, 0) = x;
        pos(i, 1) = 0.0;
        x += (i % 2 == 0) ? a1 : a2;
    }
    pos.col(0).array() -= pos.col(0).mean();
    return pos;
}

// --- finite-size spectrum -----------------------------------------------------

inline Eigen::MatrixXcd effective_hamiltonian(const Positions& pos, const Vec3c& d) {
    return coupling_matrix(pos, d).c;
}

struct SpectralReport {
    Eigen::VectorXcd eigenvalues;   // sorted by real part
    Eigen::MatrixXcd eigenvectors;  // columns, unit norm, same order
    Eigen::VectorXd ipr;            // sum |psi_i|^4 per state
    double median_ipr = 0.0;
    std::optional<std::pair<int, int>> midgap_pair; // localized pair nearest mid-spectrum
};

inline double inverse_participation_ratio(const Eigen::VectorXcd& psi) {
    const double norm2 = psi.squaredNorm();
    if (norm2 == 0.0) throw NumericalError("zero eigenvector");
    double s = 0.0;
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        const double w = std::norm(psi(i)) / norm2;
        s += w * w;
    }
    return s;
}

inline double outer_weight(const Eigen::VectorXcd& psi, int sites_per_end = 2) {
    const auto n = psi.size();
    if (2 * sites_per_end > n) throw ConfigError("outer window exceeds chain length");
    const double norm2 = psi.squaredNorm();
    double s = 0.0;
    for (int i = 0; i < sites_per_end; ++i)
        s += std::norm(psi(i)) + std::norm(psi(n - 1 - i));
    return s / norm2;
}

inline SpectralReport spectrum_ipr(const Eigen::MatrixXcd& h) {
    if (h.rows() != h.cols() || h.rows() < 2) throw ConfigError("hamiltonian must be square");
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    const auto n = h.rows();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return es.eigenvalues()(a).real() < es.eigenvalues()(b).real();
    });
    SpectralReport rep;
    rep.eigenvalues.resize(n);
    rep.eigenvectors.resize(n, n);
    rep.ipr.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        rep.eigenvalues(i) = es.eigenvalues()(order[i]);
        rep.eigenvectors.col(i) = es.eigenvectors().col(order[i]).normalized();
        rep.ipr(i) = inverse_participation_ratio(rep.eigenvectors.col(i));
    }
    std::vector<double> ipr_sorted(rep.ipr.data(), rep.ipr.data() + n);
    std::nth_element(ipr_sorted.begin(), ipr_sorted.begin() + n / 2, ipr_sorted.end());
    rep.median_ipr = ipr_sorted[static_cast<std::size_t>(n / 2)];

    const double mid = 0.5 * (rep.eigenvalues(0).real() + rep.eigenvalues(n - 1).real());
    std::vector<int> by_mid(static_cast<std::size_t>(n));
    std::iota(by_mid.begin(), by_mid.end(), 0);
    std::sort(by_mid.begin(), by_mid.end(), [&](int a, int b) {
        return std::abs(rep.eigenvalues(a).real() - mid) < std::abs(rep.eigenvalues(b).real() - mid);
    });
    const int i1 = by_mid[0], i2 = by_mid[1];
    if (rep.ipr(i1) > 3.0 * rep.median_ipr && rep.ipr(i2) > 3.0 * rep.median_ipr)
        rep.midgap_pair = std::make_pair(std::min(i1, i2), std::max(i1, i2));
    return rep;
}

// --- Bloch bands of the infinite dimerized chain ------------------------------
// Two-site cell of length L = a1 + a2, sublattice B offset a1 from A. The
// k-dependence enters only through exp(i k c L), so H(k + 2pi/L) = H(k).

inline Eigen::Matrix2cd bloch_hamiltonian(double k, double a1, double a2, const Vec3c& d,
                                          int cutoff_cells = 100) {
    if (!(a1 > 0.0) || !(a2 > 0.0)) throw ConfigError("cell distances must be positive");
    if (cutoff_cells < 10) throw ConfigError("coupling cutoff too small");
    validate_dipole(d);
    const double cell = a1 + a2;
    const double mu = std::norm(d.dot(Eigen::Vector3cd(1.0, 0.0, 0.0)));
    const cplx I(0.0, 1.0);
    cplx haa = cplx(0.0, -0.5);
    cplx hab = 0.0;
    for (int c = -cutoff_cells; c <= cutoff_cells; ++c) {
        const cplx phase = std::exp(I * (k * cell * c));
        if (c != 0) haa += coupling_radial(std::abs(c) * cell, mu) * phase;
        hab += coupling_radial(std::abs(a1 + c * cell), mu) * phase;
    }
    Eigen::Matrix2cd h;
    h(0, 0) = haa;
    h(1, 1) = haa;
    h(0, 1) = hab;
    // H_BA(k) = sum_c C(|a1 - c L|) e^{ikcL} = H_AB(-k)
    cplx hba = 0.0;
    for (int c = -cutoff_cells; c <= cutoff_cells; ++c)
        hba += coupling_radial(std::abs(a1 - c * cell), mu) * std::exp(I * (k * cell * c));
    h(1, 0) = hba;
    return h;
}

struct BandStructure {
    Eigen::VectorXd k;        // radians per lambda0, one period (-pi/L, pi/L]
    Eigen::MatrixXcd bands;   // n_k x 2, sorted by real part at each k
    double min_gap = 0.0;     // min over k of Re(upper - lower)
};

inline BandStructure band_structure(double a1, double a2, const Vec3c& d, int n_k = 256,
                                    int cutoff_cells = 100) {
    if (n_k < 16) throw ConfigError("band structure needs more k points");
    const double cell = a1 + a2;
    BandStructure bs;
    bs.k.resize(n_k);
    bs.bands.resize(n_k, 2);
    bs.min_gap = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n_k; ++j) {
        const double k = -std::numbers::pi / cell +
                         (j + 1) * (2.0 * std::numbers::pi / cell) / n_k;
        bs.k(j) = k;
        Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(bloch_hamiltonian(k, a1, a2, d, cutoff_cells));
        if (es.info() != Eigen::Success) throw NumericalError("band eigensolve failed");
        cplx lo = es.eigenvalues()(0), hi = es.eigenvalues()(1);
        if (lo.real() > hi.real()) std::swap(lo, hi);
        bs.bands(j, 0) = lo;
        bs.bands(j, 1) = hi;
        bs.min_gap = std::min(bs.min_gap, hi.real() - lo.real());
    }
    return bs;
}

// --- Zak phase ------------------------------------------------------------------
// Discrete Wilson loop over one Brillouin zone. The effective Hamiltonian is
// non-Hermitian, so the default pairs left and right eigenvectors; the
// right-right variant is kept as a cross-check.

enum class ZakMethod { Biorthogonal, RightRight };

enum class ZakBand { Lower, Upper };

namespace detail {

struct BandPair {
    Eigen::Vector2cd right;
    Eigen::Vector2cd left;   // eigenvector of H^dagger with conjugate eigenvalue
    cplx lambda;
};

inline BandPair band_at(const Eigen::Matrix2cd& h, const Eigen::Vector2cd* follow, ZakBand which) {
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("zak eigensolve failed");
    int pick;
    if (follow) {
        const double o0 = std::abs(follow->dot(es.eigenvectors().col(0)));
        const double o1 = std::abs(follow->dot(es.eigenvectors().col(1)));
        pick = o1 > o0 ? 1 : 0;
    } else {
        const bool lower = es.eigenvalues()(0).real() < es.eigenvalues()(1).real();
        pick = (which == ZakBand::Lower) == lower ? 0 : 1;
    }
    BandPair bp;
    bp.lambda = es.eigenvalues()(pick);
    bp.right = es.eigenvectors().col(pick).normalized();

    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> esl(h.adjoint());
    if (esl.info() != Eigen::Success) throw NumericalError("zak left eigensolve failed");
    const double d0 = std::abs(std::conj(esl.eigenvalues()(0)) - bp.lambda);
    const double d1 = std::abs(std::conj(esl.eigenvalues()(1)) - bp.lambda);
    bp.left = esl.eigenvectors().col(d0 <= d1 ? 0 : 1);
    const cplx ov = bp.left.dot(bp.right); // conjugates the left factor
    if (std::abs(ov) < 1e-12) throw NumericalError("left and right eigenvectors orthogonal");
    bp.left /= std::conj(ov); // now left^dagger right = 1
    return bp;
}

} // namespace detail

inline double zak_phase(const std::function<Eigen::Matrix2cd(double)>& h_of_k, double cell_length,
                        int n_k = 200, ZakMethod method = ZakMethod::Biorthogonal,
                        ZakBand band = ZakBand::Lower) {
    if (n_k < 8) throw ConfigError("zak phase needs at least 8 k points");
    if (!(cell_length > 0.0)) throw ConfigError("cell length must be positive");
    const double dk = 2.0 * std::numbers::pi / cell_length / n_k;
    std::vector<detail::BandPair> pts;
    pts.reserve(static_cast<std::size_t>(n_k));
    for (int j = 0; j < n_k; ++j) {
        const double k = -std::numbers::pi / cell_length + j * dk;
        const Eigen::Vector2cd* follow = pts.empty() ? nullptr : &pts.back().right;
        pts.push_back(detail::band_at(h_of_k(k), follow, band));
    }
    cplx prod = 1.0;
    for (int j = 0; j < n_k; ++j) {
        const auto& a = pts[static_cast<std::size_t>(j)];
        const auto& b = pts[static_cast<std::size_t>((j + 1) % n_k)];
        const cplx ov = (method == ZakMethod::Biorthogonal) ? a.left.dot(b.right)
                                                            : a.right.dot(b.right);
        if (std::abs(ov) < 0.1)
            throw NumericalError("zak phase lost band continuity (overlap < 0.1)");
        prod *= ov / std::abs(ov);
    }
    return -std::arg(prod); // principal value in (-pi, pi]
}

inline double zak_phase(double a1, double a2, const Vec3c& d, int n_k = 200,
                        ZakMethod method = ZakMethod::Biorthogonal,
                        ZakBand band = ZakBand::Lower, int cutoff_cells = 100) {
    auto h = [&](double k) { return bloch_hamiltonian(k, a1, a2, d, cutoff_cells); };
    return zak_phase(h, a1 + a2, n_k, method, band);
}

} // namespace selforg

#endif
