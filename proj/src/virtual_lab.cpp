#include "netchar/virtual_lab.hpp"
#include "netchar/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace netchar {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_channel_vector(const std::vector<double>& v, std::size_t n,
                          const char* name) {
    if (!v.empty() && v.size() != n) {
        std::ostringstream msg;
        msg << "NoiseModel: " << name << " has " << v.size()
            << " entries, expected " << n << " (or none)";
        throw validation_error(msg.str());
    }
}

} // namespace

void NoiseModel::validate(std::size_t n_modes) const {
    if (intensity_sigma < 0.0 || !std::isfinite(intensity_sigma))
        throw validation_error("NoiseModel: intensity_sigma must be >= 0");
    if (phase_jitter_sigma < 0.0 || !std::isfinite(phase_jitter_sigma))
        throw validation_error("NoiseModel: phase_jitter_sigma must be >= 0");
    check_channel_vector(gain, n_modes, "gain");
    check_channel_vector(offset, n_modes, "offset");
    for (double g : gain)
        if (!(g > 0.0)) throw validation_error("NoiseModel: gains must be > 0");
}

double NoiseModel::gain_for(std::size_t channel) const {
    return gain.empty() ? 1.0 : gain.at(channel);
}

double NoiseModel::offset_for(std::size_t channel) const {
    return offset.empty() ? 0.0 : offset.at(channel);
}

double SweepConfig::range() const {
    return periods * kTwoPi;
}

void SweepConfig::validate() const {
    if (samples < 64)
        throw validation_error("SweepConfig: at least 64 samples required");
    if (!(periods * kTwoPi >= kTwoPi - 1e-12))
        throw validation_error("SweepConfig: phase range must cover at least 2pi");
}

void FringeTrace::validate() const {
    if (paired_input < 1)
        throw validation_error("FringeTrace: paired input must differ from the reference mode");
    if (samples() < 64)
        throw validation_error("FringeTrace: at least 64 samples required");
    if (intensity.cols() != phi.size())
        throw validation_error("FringeTrace: sample count mismatch between phi and intensities");
    for (Eigen::Index s = 1; s < phi.size(); ++s)
        if (!(phi(s) > phi(s - 1)))
            throw validation_error("FringeTrace: phi must be strictly increasing");
    if (!(phi(phi.size() - 1) - phi(0) >= kTwoPi - 1e-9))
        throw validation_error("FringeTrace: phi must span at least 2pi");
}

MeasurementPlan MeasurementPlan::for_modes(std::size_t n) {
    if (n < 2) throw validation_error("MeasurementPlan: need at least 2 modes");
    MeasurementPlan plan;
    plan.configurations.reserve(2 * n - 1);
    for (std::size_t j = 0; j < n; ++j)
        plan.configurations.push_back({Kind::single_input, j});
    for (std::size_t j = 1; j < n; ++j)
        plan.configurations.push_back({Kind::phase_sweep, j});
    return plan;
}

void MeasurementRecord::validate() const {
    if (n < 2) throw validation_error("MeasurementRecord: need at least 2 modes");
    if (singles.size() != n || traces.size() != n - 1) {
        std::ostringstream msg;
        msg << "MeasurementRecord: expected " << n << " single-input records and "
            << n - 1 << " fringe traces (2N-1 configurations), got "
            << singles.size() << " and " << traces.size();
        throw validation_error(msg.str());
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (singles[j].input_mode != j)
            throw validation_error("MeasurementRecord: single-input records out of order");
        if (singles[j].intensities.size() != n)
            throw validation_error("MeasurementRecord: single-input record has wrong channel count");
        if (!(singles[j].probe_intensity > 0.0))
            throw validation_error("MeasurementRecord: probe intensity must be > 0");
    }
    for (std::size_t j = 1; j < n; ++j) {
        const FringeTrace& t = traces[j - 1];
        if (t.paired_input != j)
            throw validation_error("MeasurementRecord: fringe traces out of order");
        if (t.channels() != n)
            throw validation_error("MeasurementRecord: fringe trace has wrong channel count");
        t.validate();
    }
    noise.validate(n);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t configuration_index) {
    // splitmix64 step on seed advanced by the configuration index
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (configuration_index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

void check_input_mode(const TransferMatrix& net, std::size_t mode, const char* what) {
    if (mode >= static_cast<std::size_t>(net.modes())) {
        std::ostringstream msg;
        msg << what << ": input mode " << mode << " out of range [0, " << net.modes() << ")";
        throw validation_error(msg.str());
    }
}

} // namespace

SingleInputRecord run_single_input(const TransferMatrix& net, std::size_t input_mode,
                                   double intensity, const NoiseModel& noise) {
    check_input_mode(net, input_mode, "run_single_input");
    if (!(intensity > 0.0))
        throw validation_error("run_single_input: probe intensity must be > 0");
    const std::size_t n = static_cast<std::size_t>(net.modes());
    noise.validate(n);

    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SingleInputRecord rec;
    rec.input_mode = input_mode;
    rec.probe_intensity = intensity;
    rec.intensities.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double r = std::abs(net.matrix()(static_cast<Eigen::Index>(input_mode),
                                               static_cast<Eigen::Index>(k)));
        const double ideal = intensity * r * r;
        const double z = gauss(rng);
        rec.intensities[k] =
            noise.gain_for(k) * ideal * (1.0 + noise.intensity_sigma * z) + noise.offset_for(k);
    }
    return rec;
}

FringeTrace run_phase_sweep(const TransferMatrix& net, std::size_t paired_input,
                            double intensity, const SweepConfig& sweep,
                            const NoiseModel& noise) {
    check_input_mode(net, paired_input, "run_phase_sweep");
    if (paired_input == 0)
        throw validation_error("run_phase_sweep: the reference mode cannot pair with itself");
    if (!(intensity > 0.0))
        throw validation_error("run_phase_sweep: probe intensity must be > 0");
    sweep.validate();
    const std::size_t n = static_cast<std::size_t>(net.modes());
    noise.validate(n);

    std::mt19937_64 rng(noise.seed);
    std::uniform_real_distribution<double> uniform(0.0, kTwoPi);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const std::size_t s_count = sweep.samples;
    const double range = sweep.range();
    const double phi0 = uniform(rng); // unknown to the analysis side

    FringeTrace trace;
    trace.paired_input = paired_input;
    trace.probe_intensity = intensity;
    trace.phi.resize(static_cast<Eigen::Index>(s_count));
    trace.intensity.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(s_count));

    const auto& m = net.matrix();
    const Eigen::Index j = static_cast<Eigen::Index>(paired_input);
    for (std::size_t s = 0; s < s_count; ++s) {
        const double phi = range * static_cast<double>(s) / static_cast<double>(s_count - 1);
        trace.phi(static_cast<Eigen::Index>(s)) = phi;
        const double jitter = noise.phase_jitter_sigma * gauss(rng);
        const linalg::Complex arm = std::polar(1.0, phi + phi0 + jitter);
        for (std::size_t k = 0; k < n; ++k) {
            const Eigen::Index kc = static_cast<Eigen::Index>(k);
            const double ideal = intensity * std::norm(m(0, kc) + m(j, kc) * arm);
            const double z = gauss(rng);
            trace.intensity(kc, static_cast<Eigen::Index>(s)) =
                noise.gain_for(k) * ideal * (1.0 + noise.intensity_sigma * z) +
                noise.offset_for(k);
        }
    }
    return trace;
}

MeasurementRecord execute_plan(const TransferMatrix& net, double intensity,
                               const SweepConfig& sweep, const NoiseModel& noise) {
    const std::size_t n = static_cast<std::size_t>(net.modes());
    if (n < 2) throw validation_error("execute_plan: need at least 2 modes");
    noise.validate(n);
    sweep.validate();

    const MeasurementPlan plan = MeasurementPlan::for_modes(n);

    MeasurementRecord record;
    record.n = n;
    record.probe_intensity = intensity;
    record.sweep = sweep;
    record.noise = noise;
    record.singles.reserve(n);
    record.traces.reserve(n - 1);

    for (std::size_t idx = 0; idx < plan.size(); ++idx) {
        const auto& cfg = plan.configurations[idx];
        NoiseModel sub = noise;
        sub.seed = derive_seed(noise.seed, idx);
        if (cfg.kind == MeasurementPlan::Kind::single_input) {
            record.singles.push_back(run_single_input(net, cfg.input_mode, intensity, sub));
        } else {
            record.traces.push_back(run_phase_sweep(net, cfg.input_mode, intensity, sweep, sub));
        }
    }
    record.validate();
    return record;
}

} // namespace netchar
