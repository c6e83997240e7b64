#pragma once

namespace cespdc {

// Cluster-effect calculus for a doubly resonant cavity whose signal comb
// (FSR fsr_s) is slightly wider than the idler comb (FSR fsr_i).

/// Frequency spacing between doubly resonant signal/idler mode pairs:
/// fsr_s * fsr_i / (fsr_s - fsr_i). Requires fsr_s > fsr_i > 0.
double cluster_spacing(double fsr_s_hz, double fsr_i_hz);

struct ModeCounts {
    double signal = 0.0;  // N_s
    double idler = 0.0;   // N_i = N_s + 1
};

/// Modes per cluster spacing, from the FSRs.
ModeCounts mode_counts(double fsr_s_hz, double fsr_i_hz);

/// Same quantity from the refractive indices n_y (signal) < n_z (idler).
ModeCounts mode_counts_from_indices(double n_y, double n_z);

/// Detuning between the orthogonal modes at the neighbouring cluster:
/// min(frac(N), 1 - frac(N)) * (fsr_s - fsr_i). At frac = 1/2 both branches agree.
double orthogonal_offset(double n_modes, double fsr_s_hz, double fsr_i_hz);

/// Single-longitudinal-mode condition: linewidth_s + linewidth_i < offset (strict).
bool is_single_mode(double offset_hz, double linewidth_s_hz, double linewidth_i_hz);

struct ClusterAnalysis {
    double fsr_s_hz = 0.0;
    double fsr_i_hz = 0.0;
    double cluster_spacing_hz = 0.0;
    ModeCounts counts;
    double offset_hz = 0.0;
    double linewidth_s_hz = 0.0;
    double linewidth_i_hz = 0.0;
    bool single_mode = false;
};

ClusterAnalysis analyze_clusters(double fsr_s_hz, double fsr_i_hz, double linewidth_s_hz, double linewidth_i_hz);

}  // namespace cespdc
