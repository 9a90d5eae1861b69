#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "replaymod/spline.hpp"

namespace replaymod {

struct ResponsePoint {
    double freq_hz = 0.0;
    double gain = 0.0;  // output/input amplitude ratio, dimensionless
};

// Discrete amplitude-response measurements, strictly increasing in frequency.
struct DiscreteResponse {
    std::vector<ResponsePoint> points;
};

// Continuous amplitude response fitted through a DiscreteResponse. Evaluation
// outside [f_min, f_max] clamps to the nearest end knot's gain.
struct ResponseCurve {
    CubicSpline spline;
    double f_min = 0.0;
    double f_max = 0.0;

    double operator()(double f) const { return spline.eval(f); }
};

// Ground truth of a virtual loudspeaker, realized per FFT bin. true_amplitude
// and true_phase are conjugate-symmetric (amplitude even, phase odd, bins 0
// and N/2 phase-free) so that filtering a real signal stays real.
struct SpeakerProfile {
    std::string name;
    std::vector<double> true_amplitude;  // H(k), >= 0
    std::vector<double> true_phase;      // psi(k), radians in (-pi, pi]
    double subbass_noise_level = 1e-3;   // RMS of the 20-60 Hz enclosure resonance
    double delta_f = 0.0;

    size_t size() const { return true_amplitude.size(); }
};

// Per-bin compensation gains H^-1(k). Bins whose (folded) frequency is below
// subbass_cut_hz are zero after construction.
struct InverseFilter {
    std::vector<double> gains;
    double eps = 1e-3;
    double c = 1.0;
    double subbass_cut_hz = 60.0;
    double delta_f = 0.0;

    size_t size() const { return gains.size(); }
};

// The 68-frequency measurement grid: 60..225 step 15, 250..500 step 50,
// 550..2000 step 50, 2100..4000 step 100 (all Hz).
std::vector<double> measurement_grid();

// Plays a unit-amplitude test sine per grid frequency through the virtual
// speaker and records the output/input amplitude ratio at the nearest bin.
// n_fft is both the test-signal length and the analysis size; it must be a
// power of two spanning at least 0.5 s at fs. Throws if a grid frequency
// reaches Nyquist or the profile size differs from n_fft.
DiscreteResponse measure_speaker(const SpeakerProfile& profile, int fs, size_t n_fft,
                                 uint64_t seed = 0);

// Natural cubic spline through the measured points; exact at every knot.
// Requires >= 4 strictly increasing points.
ResponseCurve fit_response(const DiscreteResponse& measured);

// Samples the curve at k * delta_f for the lower half, clamps outside the
// curve domain, and mirrors the upper half (conjugate-symmetry convention).
std::vector<double> sample_response(const ResponseCurve& curve, double delta_f,
                                    size_t n_bins);

// gains[k] = c / (H(k) + eps) for folded bin frequencies >= subbass_cut_hz,
// 0 below the cut, and 0 wherever H(k) = 0 with eps = 0. eps must be 0 or in
// [1e-4, 1e-1]; c must be positive.
InverseFilter build_inverse_filter(const std::vector<double>& response_gains,
                                   double delta_f, double eps, double c = 1.0,
                                   double subbass_cut_hz = 60.0);

// ---- Virtual speaker construction ----------------------------------------

struct SpeakerOptions {
    double phase_bound = 0.78539816339744830962;  // pi/4
    double delay_s = 0.0;  // optional pure-delay linear phase term
    double subbass_noise_level = 1e-3;
};

// Builds a profile of n_fft bins from a continuous amplitude function of
// frequency plus a seeded smooth phase response (natural cubic spline through
// 8 uniformly spaced control points in [-phase_bound, phase_bound]).
SpeakerProfile make_speaker_profile(const std::string& name,
                                    const std::function<double(double)>& gain_fn,
                                    int fs, size_t n_fft, uint64_t seed,
                                    const SpeakerOptions& opts = {});

// Named presets: "flat" (H = 1), "phone" (high-pass, cut-off near 500 Hz),
// "two-way" (woofer+tweeter ridges). Presets other than "flat" carry
// irregular passband ripple; the same (preset, seed) pair describes the same
// speaker at any n_fft. Throws on an unknown name.
SpeakerProfile make_preset_speaker(const std::string& preset, int fs, size_t n_fft,
                                   uint64_t seed);
bool is_preset_speaker(const std::string& preset);

// Continuous gain function of a preset (the simulator's ground truth),
// including ripple; exposed for tests and the measurement CLI.
std::function<double(double)> preset_gain_fn(const std::string& preset, uint64_t seed);

// ---- Serialization --------------------------------------------------------
// Line-oriented text: header "# speaker <name> fs=<Hz>", then
// freq_hz<TAB>gain[<TAB>phase_rad] rows (one-sided bins for profiles).

void save_profile(const std::filesystem::path& path, const SpeakerProfile& profile,
                  int fs);
SpeakerProfile load_profile(const std::filesystem::path& path);
void save_response(const std::filesystem::path& path, const std::string& name,
                   int fs, const DiscreteResponse& response);
DiscreteResponse load_response(const std::filesystem::path& path);

}  // namespace replaymod
