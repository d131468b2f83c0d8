#pragma once

// Digital Butterworth design (bilinear transform with pre-warping) in
// second-order sections, plus causal and zero-phase (forward-backward)
// application.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biocomp/error.hpp"

namespace biocomp {

/// One second-order section, a0 normalized to 1, transposed direct form II.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

using Sos = std::vector<Biquad>;

enum class BandType { LowPass, HighPass, BandPass };

namespace detail {

using cplx = std::complex<double>;

inline cplx section_response(const Biquad& s, double omega) {
    const cplx z1 = std::polar(1.0, -omega);
    const cplx z2 = z1 * z1;
    return (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
}

}  // namespace detail

/// Complex frequency response of a cascade at frequency `f_hz`.
inline std::complex<double> sos_response(const Sos& sos, double f_hz, double fs) {
    const double omega = 2.0 * std::numbers::pi * f_hz / fs;
    std::complex<double> h{1.0, 0.0};
    for (const auto& s : sos) h *= detail::section_response(s, omega);
    return h;
}

/// Butterworth filter of prototype order `order`. Band-pass designs have
/// 2*order poles. Edges are in Hz; `f_low` is ignored for low-pass and
/// `f_high` for high-pass.
inline Sos butterworth(int order, BandType type, double f_low, double f_high, double fs) {
    using detail::cplx;
    const double nyq = fs / 2.0;
    if (order < 1 || !(fs > 0.0)) throw FilterDesignError("butterworth: invalid order or sample rate");
    auto check_edge = [&](double f, const char* what) {
        if (!(f > 0.0 && f < nyq))
            throw FilterDesignError(std::string("butterworth: ") + what + " edge " + std::to_string(f) +
                                    " Hz outside (0, " + std::to_string(nyq) + ") Hz");
    };
    if (type == BandType::LowPass) check_edge(f_high, "upper");
    if (type == BandType::HighPass) check_edge(f_low, "lower");
    if (type == BandType::BandPass) {
        check_edge(f_low, "lower");
        check_edge(f_high, "upper");
        if (!(f_low < f_high)) throw FilterDesignError("butterworth: lower edge must be below upper edge");
    }

    const double fs2 = 2.0 * fs;
    auto warp = [&](double f) { return fs2 * std::tan(std::numbers::pi * f / fs); };

    std::vector<cplx> proto;
    for (int m = -order + 1; m < order; m += 2)
        proto.push_back(-std::exp(cplx(0.0, std::numbers::pi * m / (2.0 * order))));

    std::vector<cplx> analog;
    double ref_omega = 0.0;
    switch (type) {
        case BandType::LowPass: {
            const double wc = warp(f_high);
            for (auto p : proto) analog.push_back(p * wc);
            ref_omega = 0.0;
            break;
        }
        case BandType::HighPass: {
            const double wc = warp(f_low);
            for (auto p : proto) analog.push_back(wc / p);
            ref_omega = std::numbers::pi;
            break;
        }
        case BandType::BandPass: {
            const double w1 = warp(f_low), w2 = warp(f_high);
            const double bw = w2 - w1, w0 = std::sqrt(w1 * w2);
            for (auto p : proto) {
                const cplx half = p * bw / 2.0;
                const cplx root = std::sqrt(half * half - w0 * w0);
                analog.push_back(half + root);
                analog.push_back(half - root);
            }
            ref_omega = 2.0 * std::atan(w0 / fs2);
            break;
        }
    }

    std::vector<cplx> poles;
    for (auto s : analog) poles.push_back((fs2 + s) / (fs2 - s));

    // Pair conjugates; leftover real poles pair with each other.
    std::vector<cplx> upper;
    std::vector<double> reals;
    for (auto p : poles) {
        if (std::abs(p.imag()) > 1e-12 * std::max(1.0, std::abs(p))) {
            if (p.imag() > 0.0) upper.push_back(p);
        } else {
            reals.push_back(p.real());
        }
    }
    std::sort(reals.begin(), reals.end());

    Sos sos;
    auto numerator = [&](Biquad& s, bool first_order) {
        if (type == BandType::LowPass) {
            if (first_order) s.b0 = 1.0, s.b1 = 1.0, s.b2 = 0.0;
            else s.b0 = 1.0, s.b1 = 2.0, s.b2 = 1.0;
        } else if (type == BandType::HighPass) {
            if (first_order) s.b0 = 1.0, s.b1 = -1.0, s.b2 = 0.0;
            else s.b0 = 1.0, s.b1 = -2.0, s.b2 = 1.0;
        } else {
            s.b0 = 1.0, s.b1 = 0.0, s.b2 = -1.0;
        }
    };
    for (auto p : upper) {
        Biquad s;
        s.a1 = -2.0 * p.real();
        s.a2 = std::norm(p);
        numerator(s, false);
        sos.push_back(s);
    }
    for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
        Biquad s;
        s.a1 = -(reals[i] + reals[i + 1]);
        s.a2 = reals[i] * reals[i + 1];
        numerator(s, false);
        sos.push_back(s);
    }
    if (reals.size() % 2 == 1) {
        Biquad s;
        s.a1 = -reals.back();
        s.a2 = 0.0;
        numerator(s, true);
        sos.push_back(s);
    }
    // Butterworth magnitude is exactly 1 at DC (low-pass), Nyquist (high-pass)
    // and the warped geometric center (band-pass).
    for (auto& s : sos) {
        const double g = 1.0 / std::abs(detail::section_response(s, ref_omega));
        s.b0 *= g;
        s.b1 *= g;
        s.b2 *= g;
    }
    return sos;
}

/// Per-section state for a unit-step steady state (scaled by the input level).
inline std::vector<std::array<double, 2>> sosfilt_zi(const Sos& sos) {
    std::vector<std::array<double, 2>> zi;
    double scale = 1.0;
    for (const auto& s : sos) {
        const double gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
        const double z2 = s.b2 - s.a2 * gain;
        const double z1 = s.b1 + s.b2 - (s.a1 + s.a2) * gain;
        zi.push_back({scale * z1, scale * z2});
        scale *= gain;
    }
    return zi;
}

/// Causal filtering in place; `state` is updated.
inline void sosfilt_inplace(const Sos& sos, std::span<double> x, std::vector<std::array<double, 2>>& state) {
    state.resize(sos.size(), {0.0, 0.0});
    for (std::size_t k = 0; k < sos.size(); ++k) {
        const auto& s = sos[k];
        double z1 = state[k][0], z2 = state[k][1];
        for (double& v : x) {
            const double in = v;
            const double y = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * y + z2;
            z2 = s.b2 * in - s.a2 * y;
            v = y;
        }
        state[k] = {z1, z2};
    }
}

inline std::vector<double> sosfilt(const Sos& sos, std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    std::vector<std::array<double, 2>> state(sos.size(), {0.0, 0.0});
    sosfilt_inplace(sos, y, state);
    return y;
}

/// Zero-phase filtering: odd extension at both ends, steady-state initial
/// conditions, forward pass, backward pass.
inline std::vector<double> sosfiltfilt(const Sos& sos, std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    std::size_t pad = 3 * (2 * sos.size() + 1);
    pad = std::min(pad, n - 1);

    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    const auto zi = sosfilt_zi(sos);
    auto scaled = [&](double level) {
        auto z = zi;
        for (auto& s : z) s[0] *= level, s[1] *= level;
        return z;
    };
    auto state = scaled(ext.front());
    sosfilt_inplace(sos, ext, state);
    std::reverse(ext.begin(), ext.end());
    state = scaled(ext.front());
    sosfilt_inplace(sos, ext, state);
    std::reverse(ext.begin(), ext.end());
    return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace biocomp
