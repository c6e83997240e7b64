#include "core/clustering.hpp"

#include <cmath>

#include "core/error.hpp"

namespace cespdc {

namespace {

void check_fsr_pair(double fsr_s, double fsr_i) {
    if (!(fsr_s > 0.0) || !(fsr_i > 0.0)) throw DomainError("cluster: FSRs must be > 0");
    if (fsr_s == fsr_i) {
        throw DomainError("cluster: degenerate birefringence, signal and idler FSRs are equal "
                          "(cluster spacing is infinite)");
    }
    if (fsr_s < fsr_i) {
        throw PreconditionError("cluster: argument order, signal FSR must exceed idler FSR");
    }
}

}  // namespace

double cluster_spacing(double fsr_s_hz, double fsr_i_hz) {
    check_fsr_pair(fsr_s_hz, fsr_i_hz);
    return fsr_s_hz * fsr_i_hz / (fsr_s_hz - fsr_i_hz);
}

ModeCounts mode_counts(double fsr_s_hz, double fsr_i_hz) {
    check_fsr_pair(fsr_s_hz, fsr_i_hz);
    const double gap = fsr_s_hz - fsr_i_hz;
    return {fsr_i_hz / gap, fsr_s_hz / gap};
}

ModeCounts mode_counts_from_indices(double n_y, double n_z) {
    if (!(n_y > 0.0) || !(n_z > n_y)) throw DomainError("mode_counts: need 0 < n_y < n_z");
    const double d = n_z - n_y;
    return {n_y / d, n_z / d};
}

double orthogonal_offset(double n_modes, double fsr_s_hz, double fsr_i_hz) {
    if (!(n_modes > 0.0)) throw DomainError("orthogonal_offset: N must be > 0");
    check_fsr_pair(fsr_s_hz, fsr_i_hz);
    const double frac = n_modes - std::floor(n_modes);
    const double gap = fsr_s_hz - fsr_i_hz;
    return (frac < 0.5 ? frac : 1.0 - frac) * gap;
}

bool is_single_mode(double offset_hz, double linewidth_s_hz, double linewidth_i_hz) {
    if (!(offset_hz >= 0.0) || !(linewidth_s_hz > 0.0) || !(linewidth_i_hz > 0.0)) {
        throw DomainError("is_single_mode: arguments must be positive");
    }
    return linewidth_s_hz + linewidth_i_hz < offset_hz;
}

ClusterAnalysis analyze_clusters(double fsr_s_hz, double fsr_i_hz, double linewidth_s_hz, double linewidth_i_hz) {
    ClusterAnalysis a;
    a.fsr_s_hz = fsr_s_hz;
    a.fsr_i_hz = fsr_i_hz;
    a.cluster_spacing_hz = cluster_spacing(fsr_s_hz, fsr_i_hz);
    a.counts = mode_counts(fsr_s_hz, fsr_i_hz);
    a.offset_hz = orthogonal_offset(a.counts.signal, fsr_s_hz, fsr_i_hz);
    a.linewidth_s_hz = linewidth_s_hz;
    a.linewidth_i_hz = linewidth_i_hz;
    a.single_mode = is_single_mode(a.offset_hz, linewidth_s_hz, linewidth_i_hz);
    return a;
}

}  // namespace cespdc
