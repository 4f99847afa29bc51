#pragma once

#include "netchar/network.hpp"

#include <cstdint>
#include <vector>

namespace netchar {

// Detector and source imperfections for the simulated bench. Noise is
// multiplicative Gaussian on intensity (shot-noise-like at high flux);
// phase jitter perturbs each sweep sample; gain and offset model detector
// calibration. Empty gain/offset vectors mean all-1 and all-0.
struct NoiseModel {
    double intensity_sigma = 0.0;    // relative std of intensity noise
    double phase_jitter_sigma = 0.0; // radians per sample
    std::vector<double> gain;
    std::vector<double> offset;
    std::uint64_t seed = 0;

    void validate(std::size_t n_modes) const;
    double gain_for(std::size_t channel) const;
    double offset_for(std::size_t channel) const;
};

// Intensities I_k observed on every output while a single coherent probe of
// intensity I enters input_mode.
struct SingleInputRecord {
    std::size_t input_mode = 0; // 0-based
    double probe_intensity = 0.0;
    std::vector<double> intensities;
};

// Phase-sweep grid: `samples` points spanning `periods` full turns of the
// relative phase. The experiment requires at least one full turn and enough
// samples to fit; defaults leave margin for fitting under jitter.
struct SweepConfig {
    std::size_t samples = 512;
    double periods = 2.5;

    double range() const;
    void validate() const;
};

// One dual-input configuration: reference input 0 plus paired_input, equal
// arm intensities, recorded intensity per channel per sample. The recorded
// phi is the stage position only; the simulator hides a per-trace offset
// phi0 drawn uniformly in [0,2pi), so consumers must recover the phase
// reference the same way the real experiment does.
struct FringeTrace {
    std::size_t paired_input = 1; // j >= 1, 0-based
    double probe_intensity = 0.0; // per arm
    Eigen::VectorXd phi;          // strictly increasing, span >= 2pi
    Eigen::MatrixXd intensity;    // channels x samples

    std::size_t channels() const { return static_cast<std::size_t>(intensity.rows()); }
    std::size_t samples() const { return static_cast<std::size_t>(phi.size()); }
    void validate() const;
};

// The 2N−1 experiment configurations in protocol order: single-input probes
// of every mode, then dual-input sweeps pairing mode 0 with each other mode.
struct MeasurementPlan {
    enum class Kind { single_input, phase_sweep };
    struct Configuration {
        Kind kind;
        std::size_t input_mode; // probed mode (single) or paired input (sweep)
    };
    std::vector<Configuration> configurations;

    static MeasurementPlan for_modes(std::size_t n);
    std::size_t size() const { return configurations.size(); }
};

struct MeasurementRecord {
    std::size_t n = 0;
    double probe_intensity = 0.0;
    SweepConfig sweep;
    NoiseModel noise;
    std::vector<SingleInputRecord> singles; // input modes 0..N−1 in order
    std::vector<FringeTrace> traces;        // paired inputs 1..N−1 in order

    void validate() const;
};

// Deterministic per-configuration sub-seed, so configurations are
// independent and order-insensitive under a fixed plan seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t configuration_index);

SingleInputRecord run_single_input(const TransferMatrix& net, std::size_t input_mode,
                                   double intensity, const NoiseModel& noise);

FringeTrace run_phase_sweep(const TransferMatrix& net, std::size_t paired_input,
                            double intensity, const SweepConfig& sweep,
                            const NoiseModel& noise);

MeasurementRecord execute_plan(const TransferMatrix& net, double intensity,
                               const SweepConfig& sweep, const NoiseModel& noise);

} // namespace netchar
