#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fkdisk/fraction.hpp"

namespace fkdisk {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

enum class BoundaryKind { FullDirichlet, SingleArc, Periodic };

enum class WallClass { Conducting, Insulated };

/// Partition of the unit-disk wall into conducting (u = 0) and insulated
/// (zero normal derivative) arcs. For Periodic, the wall splits into
/// `segments` equal sectors, each with a conducting leading fraction `alpha`.
struct BoundarySpec {
    BoundaryKind kind = BoundaryKind::FullDirichlet;
    Fraction alpha{1, 1};  // conducting fraction, in (0, 1]
    int segments = 1;      // N, only meaningful for Periodic

    static BoundarySpec full_dirichlet() { return BoundarySpec{}; }

    static BoundarySpec single_arc(Fraction alpha) {
        validate_alpha(alpha);
        return BoundarySpec{BoundaryKind::SingleArc, alpha, 1};
    }

    static BoundarySpec periodic(int segments, Fraction alpha) {
        validate_alpha(alpha);
        if (segments < 1) throw std::invalid_argument("segments must be >= 1");
        return BoundarySpec{BoundaryKind::Periodic, alpha, segments};
    }

    /// Number of identical angular sectors: N for Periodic, 1 otherwise.
    int sector_count() const {
        return kind == BoundaryKind::Periodic ? segments : 1;
    }

    bool fully_conducting() const { return alpha == Fraction(1, 1); }

    static void validate_alpha(const Fraction& a) {
        if (a.num() <= 0 || Fraction(1, 1) < a) {
            throw std::invalid_argument("alpha must lie in (0, 1]");
        }
    }
};

/// Wall classification at angle theta, following the closed-conducting /
/// half-open-insulated arc convention.
inline WallClass classify_boundary(const BoundarySpec& spec, double theta) {
    if (spec.kind == BoundaryKind::FullDirichlet || spec.fully_conducting()) {
        return WallClass::Conducting;
    }
    const int n = spec.sector_count();
    // Position within one sector, scaled to [0, 1).
    const double scaled = theta * static_cast<double>(n) / two_pi;
    const double frac = scaled - std::floor(scaled);
    // frac <= alpha, compared in rational terms to avoid a division.
    return frac * static_cast<double>(spec.alpha.den()) <=
                   static_cast<double>(spec.alpha.num())
               ? WallClass::Conducting
               : WallClass::Insulated;
}

/// Cell-centered polar grid on the unit disk.
///
/// Radial cells are uniform of width 1/n, except that when the conducting
/// arc is narrower than one cell the wall cell is subdivided geometrically
/// (a collar of `wall_refine_levels` cells) so the arc's capacity is
/// radially resolved; rho coordinates are the cell centers, and the origin
/// needs no special equation because the innermost flux face has zero
/// radius. The wall condition is imposed through a ghost value at rho = 1.
///
/// Angular nodes are uniform on [0, 2pi) with the count chosen so that every
/// sector boundary, and where possible every conducting-arc end, lands on a
/// node boundary. When the requested alpha cannot be represented on the grid
/// it is snapped to the nearest node boundary (never below one spacing) and
/// the snapped value is reported as alpha_effective.
class PolarGrid {
public:
    PolarGrid(int n, BoundarySpec spec, int nodes_per_sector, int conducting_spacings,
              std::vector<double> radial_faces)
        : n_(n),
          spec_(spec),
          faces_(std::move(radial_faces)),
          n_r_(static_cast<int>(faces_.size()) - 1),
          p_(nodes_per_sector),
          m_(conducting_spacings),
          n_theta_(spec.sector_count() * nodes_per_sector) {
        rho_.resize(n_r_);
        for (int i = 0; i < n_r_; ++i) rho_[i] = 0.5 * (faces_[i] + faces_[i + 1]);
        theta_.resize(n_theta_);
        const double dth = angular_spacing();
        for (int j = 0; j < n_theta_; ++j) theta_[j] = j * dth;
    }

    int n() const { return n_; }
    int radial_count() const { return n_r_; }
    int angular_count() const { return n_theta_; }
    int sector_count() const { return spec_.sector_count(); }
    int nodes_per_sector() const { return p_; }
    int conducting_spacings() const { return m_; }
    int wall_refine_levels() const { return n_r_ - n_ + 1; }

    double radial_spacing() const { return 1.0 / n_; }
    double angular_spacing() const { return two_pi / n_theta_; }

    const std::vector<double>& radial_faces() const { return faces_; }
    const std::vector<double>& rho_coords() const { return rho_; }
    const std::vector<double>& theta_coords() const { return theta_; }
    double rho(int i) const { return rho_[i]; }
    double theta(int j) const { return theta_[j]; }
    double cell_width(int i) const { return faces_[i + 1] - faces_[i]; }

    const BoundarySpec& spec() const { return spec_; }
    Fraction alpha_requested() const { return spec_.alpha; }
    Fraction alpha_effective() const { return m_ >= p_ ? Fraction(1, 1) : Fraction(m_, p_); }
    bool alpha_snapped() const { return alpha_effective() != spec_.alpha; }

    /// Wall treatment of angular node j (integer arithmetic, no angle
    /// round-off at transitions). Conducting arcs are closed, so the node at
    /// the snapped arc end is conducting.
    bool wall_conducting(int j) const {
        if (m_ >= p_) return true;
        const int local = j % p_;
        return local <= m_;
    }

    std::size_t size() const {
        return static_cast<std::size_t>(n_r_) * static_cast<std::size_t>(n_theta_);
    }

    /// Theta-major storage: all radial values of one angular column are
    /// contiguous.
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(n_r_) +
               static_cast<std::size_t>(i);
    }

private:
    int n_;
    BoundarySpec spec_;
    std::vector<double> faces_;
    int n_r_;
    int p_;
    int m_;
    int n_theta_;
    std::vector<double> rho_;
    std::vector<double> theta_;
};

namespace detail {

/// Largest denominator for which the angular count is bumped so that the
/// conducting arc end falls exactly on a node boundary.
inline constexpr std::int64_t alignment_den_cap = 65536;

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

inline std::int64_t ceil_div64(std::int64_t a, std::int64_t b) {
    return (a + b - 1) / b;
}

}  // namespace detail

namespace detail {

/// Uniform radial faces with the wall cell subdivided geometrically into
/// `levels` cells (ratio 1/2, the two finest equal) so the mesh resolves a
/// conducting arc narrower than one uniform cell.
inline std::vector<double> radial_faces(int n, int levels) {
    const double h = 1.0 / n;
    std::vector<double> faces;
    faces.reserve(static_cast<std::size_t>(n + std::max(levels, 1)));
    for (int i = 0; i < n; ++i) faces.push_back(i * h);
    double x = 1.0 - h;
    for (int k = 1; k < levels; ++k) {
        x += h * std::ldexp(1.0, -k);
        faces.push_back(x);
    }
    faces.push_back(1.0);
    return faces;
}

}  // namespace detail

/// Build the grid for `n` points per dimension. The radial count is n (plus
/// the wall collar when the conducting arc is sub-cell); the angular count is
/// the smallest multiple of the sector count that is >= n, raised further
/// when needed so the conducting arc spans at least one node spacing (and,
/// for exactly representable alpha, an integer number of them).
///
/// `min_nodes_per_sector` and `wall_refine_levels` let a grid sequence keep
/// its resolution proportional to n in both directions: the 1/n
/// extrapolation of critical values assumes the mesh refines self-similarly.
/// `wall_refine_levels` < 0 picks the collar depth that resolves the arc to
/// about half its width.
inline PolarGrid build_grid(int n, const BoundarySpec& spec,
                            int min_nodes_per_sector = 0,
                            int wall_refine_levels = -1) {
    if (n < 8) {
        throw std::invalid_argument("grid requires n >= 8 for second-order stencils");
    }
    const int sectors = spec.sector_count();
    const int p_base = std::max(detail::ceil_div(n, sectors), min_nodes_per_sector);

    const std::int64_t a = spec.alpha.num();
    const std::int64_t d = spec.alpha.den();

    int p = p_base;
    int m = 0;
    if (spec.fully_conducting()) {
        m = p;
    } else if (d <= detail::alignment_den_cap) {
        // Snap-free representation: p a multiple of den(alpha).
        const std::int64_t pd = d * ((p_base + d - 1) / d);
        p = static_cast<int>(pd);
        m = static_cast<int>(a * (pd / d));
    } else {
        // Irreducible alpha: nearest-node snap, never below one spacing.
        const double av = spec.alpha.value();
        p = std::max(p_base, static_cast<int>(std::ceil(1.0 / av)));
        m = static_cast<int>(std::lround(av * p));
        m = std::max(1, std::min(m, p));
    }

    int levels = wall_refine_levels;
    if (levels < 0) {
        levels = 0;
        if (!spec.fully_conducting()) {
            const double arc = spec.alpha.value() * two_pi / sectors;
            const double ratio = 2.0 / (n * arc);
            if (ratio > 1.0) {
                levels = static_cast<int>(std::ceil(std::log2(ratio)));
            }
        }
    }
    levels = std::min(levels, 40);
    return PolarGrid(n, spec, p, m, detail::radial_faces(n, levels));
}

}  // namespace fkdisk
