#pragma once

#include "netchar/network.hpp"
#include "netchar/virtual_lab.hpp"

#include <span>
#include <vector>

namespace netchar {

// Least-squares fit of a + b*cos(phi + c) to one fringe channel, solved in
// the linear parametrization a + p*cos(phi) + q*sin(phi). The covariance is
// the heteroskedasticity-robust sandwich estimate for (a, p, q), so phase
// and amplitude variances stay honest when the noise scales with signal.
struct SinusoidFit {
    double mean = 0.0;      // a
    double amplitude = 0.0; // b >= 0
    double phase = 0.0;     // c in [0, 2pi)
    double rms_residual = 0.0;
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero(); // of (a, p, q)
    double amplitude_variance = 0.0;
    double phase_variance = 0.0; // capped at pi^2/3 (uniform-phase variance)
    bool low_amplitude = false;  // b below 5x the noise floor: phase unusable
};

// Moduli r_jk = sqrt(I_k / I) from one single-input record. Intensities in
// [-negative_tol, 0) are clamped to zero and flagged; anything below
// -negative_tol is nonphysical after calibration and raises.
struct ModuliEstimate {
    std::vector<double> values;
    std::vector<bool> clamped;
};

// Phases of one matrix row extracted from a fringe trace, referenced so
// theta_j1 = 0. Channels whose fringe amplitude vanishes leave the phase
// unobservable: those report 0 with the indeterminate flag set instead of a
// fabricated value.
struct TracePhases {
    std::vector<double> theta;          // theta_jk in [0, 2pi), theta(0) == 0
    std::vector<double> theta_variance; // capped, 0 where indeterminate handling applies
    std::vector<bool> indeterminate;
};

struct ChannelDiagnostics {
    double mean = 0.0;
    double amplitude = 0.0;
    double phase = 0.0;
    double rms_residual = 0.0;
    double phase_sigma = 0.0;
    bool low_amplitude = false;
};

struct TraceDiagnostics {
    std::size_t paired_input = 1; // 0-based j
    std::vector<ChannelDiagnostics> channels;
};

struct CharacterizationResult {
    TransferMatrix matrix;          // canonical gauge: first row/column real
    Eigen::MatrixXd modulus_sigma;  // 1-sigma per element
    Eigen::MatrixXd phase_sigma;    // 1-sigma per element, 0 on first row/col
    std::vector<std::vector<bool>> indeterminate;
    std::vector<TraceDiagnostics> diagnostics;
    double noise_floor_rel = 0.0;   // pooled relative intensity noise estimate
    std::size_t clamped_intensities = 0;
};

SinusoidFit fit_sinusoid(std::span<const double> phi, std::span<const double> intensity);

ModuliEstimate moduli_from_record(const SingleInputRecord& record,
                                  double negative_tol_rel = 1e-8);

// Phase offset phi0 of the reference channel: the fitted phase c_1, so that
// shifting every channel by -c_1 puts channel 1's maximum at phi = 0.
// Raises numerical_error when the reference fringe is too weak to anchor.
double calibrate_phase_reference(const FringeTrace& trace,
                                 const std::vector<SinusoidFit>& fits);

TracePhases phases_from_trace(const FringeTrace& trace,
                              const std::vector<SinusoidFit>& fits,
                              double phi0);

// Full reconstruction: moduli from the N single-input records, phases from
// the N−1 fringe traces, assembled as M_jk = r_jk e^{i theta_jk} in the
// canonical gauge with linearized 1-sigma error bars per element.
CharacterizationResult characterize(const MeasurementRecord& record);

} // namespace netchar
