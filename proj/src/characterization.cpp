#include "netchar/characterization.hpp"

#include "netchar/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace netchar {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Variance of a phase that is effectively uniform on [0, 2pi). Reported
// variances are capped here so a garbage fit cannot claim worse-than-random
// knowledge.
constexpr double uniform_phase_variance = std::numbers::pi * std::numbers::pi / 3.0;

} // namespace

SinusoidFit fit_sinusoid(std::span<const double> phi, std::span<const double> intensity) {
    if (phi.size() != intensity.size())
        throw validation_error("fit_sinusoid: phi and intensity lengths differ");
    const auto n = static_cast<Eigen::Index>(phi.size());
    if (n < 3)
        throw validation_error("fit_sinusoid: need at least 3 samples, got " +
                               std::to_string(phi.size()));

    // Design matrix for y = a + p cos(phi) + q sin(phi).
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = std::cos(phi[i]);
        x(i, 2) = std::sin(phi[i]);
        y(i) = intensity[i];
    }

    const Eigen::Matrix3d xtx = x.transpose() * x;
    Eigen::LDLT<Eigen::Matrix3d> ldlt(xtx);
    // LDLT happily factors a rank-deficient grid (all samples at one phi),
    // so singularity is checked through the pivots rather than info().
    const Eigen::Vector3d pivots = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || pivots.minCoeff() <= 1e-12 * pivots.maxCoeff())
        throw numerical_error("fit_sinusoid: degenerate phase grid, normal equations singular");
    const Eigen::Vector3d beta = ldlt.solve(x.transpose() * y);

    const Eigen::VectorXd residual = y - x * beta;

    SinusoidFit fit;
    fit.mean = beta(0);
    const double p = beta(1);
    const double q = beta(2);
    fit.amplitude = std::hypot(p, q);
    // a + p cos + q sin = a + b cos(phi + c) with p = b cos c, q = -b sin c.
    fit.phase = wrap_phase(std::atan2(-q, p));
    fit.rms_residual = std::sqrt(residual.squaredNorm() / static_cast<double>(n));

    // Sandwich covariance (X'X)^-1 X' diag(e^2) X (X'X)^-1 with the usual
    // small-sample factor n/(n-3).
    const Eigen::Matrix3d xtx_inv = ldlt.solve(Eigen::Matrix3d::Identity());
    Eigen::Matrix3d meat = Eigen::Matrix3d::Zero();
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Vector3d row = x.row(i).transpose();
        meat += residual(i) * residual(i) * row * row.transpose();
    }
    if (n > 3)
        meat *= static_cast<double>(n) / static_cast<double>(n - 3);
    fit.covariance = xtx_inv * meat * xtx_inv;

    // Propagate (p, q) covariance to amplitude b = |(p, q)| and phase
    // c = atan2(-q, p). Gradients: db = (p, q)/b, dc = (q, -p)/b^2.
    const Eigen::Matrix2d pq_cov = fit.covariance.bottomRightCorner<2, 2>();
    const double b = fit.amplitude;
    if (b > 0.0) {
        const Eigen::Vector2d db(p / b, q / b);
        const Eigen::Vector2d dc(q / (b * b), -p / (b * b));
        fit.amplitude_variance = db.dot(pq_cov * db);
        fit.phase_variance = std::min(dc.dot(pq_cov * dc), uniform_phase_variance);
    } else {
        fit.amplitude_variance = pq_cov.trace();
        fit.phase_variance = uniform_phase_variance;
    }

    // A fringe buried in noise has no usable phase. The scale floor keeps a
    // strictly zero channel (dark port, no noise) flagged as well. The phase
    // of a flagged fit is meaningless, so it is pinned to zero rather than
    // reporting the arctangent of noise.
    const double scale = std::max(std::abs(fit.mean), fit.amplitude);
    fit.low_amplitude = fit.amplitude < std::max(5.0 * fit.rms_residual, 1e-12 * scale) ||
                        fit.amplitude == 0.0;
    if (fit.low_amplitude) {
        fit.phase = 0.0;
        fit.phase_variance = uniform_phase_variance;
    }
    return fit;
}

ModuliEstimate moduli_from_record(const SingleInputRecord& record, double negative_tol_rel) {
    if (record.probe_intensity <= 0.0)
        throw validation_error("moduli_from_record: probe intensity must be positive");

    ModuliEstimate out;
    out.values.reserve(record.intensities.size());
    out.clamped.assign(record.intensities.size(), false);
    const double floor = -negative_tol_rel * record.probe_intensity;
    for (std::size_t k = 0; k < record.intensities.size(); ++k) {
        double raw = record.intensities[k];
        if (raw < floor)
            throw validation_error("moduli_from_record: channel " + std::to_string(k + 1) +
                                   " intensity " + std::to_string(raw) +
                                   " is negative beyond tolerance; check detector offsets");
        if (raw < 0.0) {
            raw = 0.0;
            out.clamped[k] = true;
        }
        out.values.push_back(std::sqrt(raw / record.probe_intensity));
    }
    return out;
}

double calibrate_phase_reference(const FringeTrace& trace,
                                 const std::vector<SinusoidFit>& fits) {
    if (fits.size() != trace.channels())
        throw validation_error("calibrate_phase_reference: fit count does not match channels");
    const SinusoidFit& ref = fits.front();
    if (ref.low_amplitude)
        throw numerical_error(
            "calibrate_phase_reference: channel 1 fringe too weak to anchor the trace paired "
            "with input " + std::to_string(trace.paired_input + 1) +
            "; the reference output carries no interference signal");
    return ref.phase;
}

TracePhases phases_from_trace(const FringeTrace& trace,
                              const std::vector<SinusoidFit>& fits,
                              double phi0) {
    if (fits.size() != trace.channels())
        throw validation_error("phases_from_trace: fit count does not match channels");

    TracePhases out;
    const std::size_t n = fits.size();
    out.theta.assign(n, 0.0);
    out.theta_variance.assign(n, 0.0);
    out.indeterminate.assign(n, false);

    const double ref_var = fits.front().phase_variance;
    for (std::size_t k = 0; k < n; ++k) {
        if (k == 0)
            continue; // reference channel defines theta_j1 = 0 exactly
        const SinusoidFit& fit = fits[k];
        if (fit.low_amplitude) {
            out.indeterminate[k] = true;
            out.theta_variance[k] = uniform_phase_variance;
            continue;
        }
        out.theta[k] = wrap_phase(fit.phase - phi0);
        out.theta_variance[k] =
            std::min(fit.phase_variance + ref_var, uniform_phase_variance);
    }
    return out;
}

CharacterizationResult characterize(const MeasurementRecord& record) {
    record.validate();
    const std::size_t n = record.n;

    // Pass 1: moduli. r_1k comes from the dedicated first-input record, the
    // same record the fringe model uses as its reference arm.
    Eigen::MatrixXd moduli(n, n);
    std::size_t clamped = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const ModuliEstimate est = moduli_from_record(record.singles[j]);
        for (std::size_t k = 0; k < n; ++k) {
            moduli(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = est.values[k];
            if (est.clamped[k])
                ++clamped;
        }
    }

    // Pass 2: fringes. Fit every channel of every trace, pool the relative
    // residuals into a single noise-floor estimate, then extract phases.
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd theta_var = Eigen::MatrixXd::Zero(n, n);
    std::vector<std::vector<bool>> indeterminate(n, std::vector<bool>(n, false));
    std::vector<TraceDiagnostics> diagnostics;
    diagnostics.reserve(record.traces.size());

    double pooled_rel_sq = 0.0;
    std::size_t pooled_count = 0;

    for (const FringeTrace& trace : record.traces) {
        const std::size_t j = trace.paired_input;
        std::vector<SinusoidFit> fits;
        fits.reserve(n);
        std::span<const double> phi(trace.phi.data(), static_cast<std::size_t>(trace.phi.size()));
        for (std::size_t k = 0; k < n; ++k) {
            const Eigen::VectorXd channel = trace.intensity.row(static_cast<Eigen::Index>(k));
            fits.push_back(fit_sinusoid(
                phi, std::span<const double>(channel.data(),
                                             static_cast<std::size_t>(channel.size()))));
            // Fringe signal scale: sqrt(a^2 + b^2/2) is the rms of the ideal
            // sinusoid, a natural normalizer for the residual.
            const SinusoidFit& fit = fits.back();
            const double signal =
                std::sqrt(fit.mean * fit.mean + 0.5 * fit.amplitude * fit.amplitude);
            if (signal > 0.0) {
                const double rel = fit.rms_residual / signal;
                pooled_rel_sq += rel * rel;
                ++pooled_count;
            }
        }

        // An identity-like network never interferes distinct inputs: every
        // channel is flat and no phase is observable, which is fine. Only a
        // flat reference alongside live fringes is an actual failure.
        const bool all_flat = std::all_of(fits.begin(), fits.end(),
                                          [](const SinusoidFit& f) { return f.low_amplitude; });

        TracePhases phases;
        if (all_flat) {
            phases.theta.assign(n, 0.0);
            phases.theta_variance.assign(n, uniform_phase_variance);
            phases.indeterminate.assign(n, true);
            phases.indeterminate[0] = false; // reference channel is pinned by convention
            phases.theta_variance[0] = 0.0;
        } else {
            const double phi0 = calibrate_phase_reference(trace, fits);
            phases = phases_from_trace(trace, fits, phi0);
        }

        TraceDiagnostics diag;
        diag.paired_input = j;
        diag.channels.reserve(n);
        for (std::size_t k = 0; k < n; ++k) {
            const SinusoidFit& fit = fits[k];
            diag.channels.push_back({fit.mean, fit.amplitude, fit.phase, fit.rms_residual,
                                     std::sqrt(fit.phase_variance), fit.low_amplitude});
            theta(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = phases.theta[k];
            theta_var(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
                phases.theta_variance[k];
            indeterminate[j][k] = phases.indeterminate[k];
        }
        diagnostics.push_back(std::move(diag));
    }

    const double noise_floor =
        pooled_count > 0 ? std::sqrt(pooled_rel_sq / static_cast<double>(pooled_count)) : 0.0;

    // Assemble M_jk = r_jk exp(i theta_jk). Row 1 and column 1 are real by
    // construction of the phase reference.
    linalg::Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
            const auto jj = static_cast<Eigen::Index>(j);
            const auto kk = static_cast<Eigen::Index>(k);
            m(jj, kk) = std::polar(moduli(jj, kk), theta(jj, kk));
        }

    // Reconstructed moduli inherit the intensity noise, so the physicality
    // slack widens with the measured noise floor instead of rejecting a
    // perfectly good noisy estimate of a lossless network.
    PhysicalityTolerances tol;
    tol.modulus_slack = std::max(tol.modulus_slack, 8.0 * noise_floor);
    tol.gain_slack = std::max(tol.gain_slack, 8.0 * noise_floor);

    CharacterizationResult result{
        TransferMatrix(std::move(m), tol),
        Eigen::MatrixXd(n, n),
        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)),
        std::move(indeterminate),
        std::move(diagnostics),
        noise_floor,
        clamped};

    // Modulus error: r = sqrt(I/I0) with relative intensity noise s gives
    // sigma_r = s * r / 2. Phase error comes straight from the fit variances.
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
            const auto jj = static_cast<Eigen::Index>(j);
            const auto kk = static_cast<Eigen::Index>(k);
            result.modulus_sigma(jj, kk) = 0.5 * noise_floor * moduli(jj, kk);
            result.phase_sigma(jj, kk) = std::sqrt(theta_var(jj, kk));
        }

    return result;
}

} // namespace netchar
