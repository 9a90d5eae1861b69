#include "replaymod/speaker.hpp"

#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "replaymod/attack.hpp"
#include "replaymod/fft.hpp"
#include "replaymod/rng.hpp"

namespace replaymod {

namespace {

constexpr double kPi = 3.14159265358979323846;

void append_range(std::vector<double>& out, double first, double last, double step) {
    for (double f = first; f <= last + 1e-9; f += step) out.push_back(f);
}

double wrap_phase(double p) {
    // Into (-pi, pi].
    p = std::fmod(p, 2.0 * kPi);
    if (p <= -kPi) p += 2.0 * kPi;
    if (p > kPi) p -= 2.0 * kPi;
    return p;
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Seeded smooth function of frequency: natural cubic spline through control
// points at fixed frequencies with values uniform in [-1, 1]. Independent of
// any FFT size, so the same seed describes the same speaker everywhere.
CubicSpline random_smooth(uint64_t seed, double f_lo, double f_hi, size_t n_points) {
    SplitMix64 rng(seed);
    std::vector<double> xs(n_points), ys(n_points);
    for (size_t i = 0; i < n_points; ++i) {
        xs[i] = f_lo + (f_hi - f_lo) * static_cast<double>(i) /
                           static_cast<double>(n_points - 1);
        ys[i] = rng.next_range(-1.0, 1.0);
    }
    return CubicSpline::fit_natural(xs, ys);
}

double butterworth_hp(double f, double fc, int order) {
    const double x = std::pow(f / fc, order);
    return x / std::sqrt(1.0 + x * x);
}

double log_bump(double f, double center, double width) {
    if (f <= 0.0) return 0.0;
    const double t = std::log(f / center) / width;
    return std::exp(-t * t);
}

}  // namespace

std::vector<double> measurement_grid() {
    std::vector<double> grid;
    grid.reserve(68);
    append_range(grid, 60.0, 225.0, 15.0);     // bass
    append_range(grid, 250.0, 500.0, 50.0);    // low midrange
    append_range(grid, 550.0, 2000.0, 50.0);   // midrange
    append_range(grid, 2100.0, 4000.0, 100.0); // upper midrange
    return grid;
}

DiscreteResponse measure_speaker(const SpeakerProfile& profile, int fs, size_t n_fft,
                                 uint64_t seed) {
    if (fs <= 0) throw std::invalid_argument("non-positive sample rate");
    if (n_fft == 0 || (n_fft & (n_fft - 1)) != 0)
        throw std::invalid_argument("n_fft must be a power of two");
    if (profile.size() != n_fft)
        throw std::invalid_argument("profile bin count does not match n_fft");
    if (static_cast<double>(n_fft) / fs < 0.5)
        throw std::invalid_argument("n_fft spans less than 0.5 s of test tone");

    const std::vector<double> grid = measurement_grid();
    const double nyquist = fs / 2.0;
    const double delta_f = static_cast<double>(fs) / static_cast<double>(n_fft);

    DiscreteResponse response;
    response.points.reserve(grid.size());

    Signal tone;
    tone.sample_rate = fs;
    tone.samples.resize(n_fft);
    for (double f : grid) {
        if (f >= nyquist) throw std::invalid_argument("grid frequency reaches Nyquist");
        const double w = 2.0 * kPi * f / fs;
        for (size_t i = 0; i < n_fft; ++i)
            tone.samples[i] = std::sin(w * static_cast<double>(i));

        const Signal played = apply_speaker(tone, profile, seed);

        const auto k = static_cast<size_t>(std::llround(f / delta_f));
        const Spectrum in_spec = fft(tone);
        const Spectrum out_spec = fft(played);
        const double in_amp = std::abs(in_spec.bins[k]);
        const double out_amp = std::abs(out_spec.bins[k]);
        if (in_amp <= 0.0) throw std::runtime_error("degenerate test tone bin");
        response.points.push_back({f, out_amp / in_amp});
    }
    return response;
}

ResponseCurve fit_response(const DiscreteResponse& measured) {
    const auto& pts = measured.points;
    if (pts.size() < 4) throw std::invalid_argument("need at least 4 measured points");
    std::vector<double> xs(pts.size()), ys(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) {
        xs[i] = pts[i].freq_hz;
        ys[i] = pts[i].gain;
        if (i > 0 && !(xs[i] > xs[i - 1]))
            throw std::invalid_argument("frequencies must be strictly increasing");
    }
    ResponseCurve curve;
    curve.spline = CubicSpline::fit_natural(xs, ys);
    curve.f_min = xs.front();
    curve.f_max = xs.back();
    return curve;
}

std::vector<double> sample_response(const ResponseCurve& curve, double delta_f,
                                    size_t n_bins) {
    if (!(delta_f > 0.0)) throw std::invalid_argument("delta_f must be positive");
    std::vector<double> gains(n_bins, 0.0);
    const size_t half = n_bins / 2;
    for (size_t k = 0; k <= half && k < n_bins; ++k)
        gains[k] = curve(static_cast<double>(k) * delta_f);  // spline eval clamps
    for (size_t k = half + 1; k < n_bins; ++k) gains[k] = gains[n_bins - k];
    return gains;
}

InverseFilter build_inverse_filter(const std::vector<double>& response_gains,
                                   double delta_f, double eps, double c,
                                   double subbass_cut_hz) {
    if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
    if (eps != 0.0 && (eps < 1e-4 || eps > 1e-1))
        throw std::invalid_argument("eps must be 0 or in [1e-4, 1e-1]");
    if (!(delta_f > 0.0)) throw std::invalid_argument("delta_f must be positive");

    InverseFilter filter;
    filter.eps = eps;
    filter.c = c;
    filter.subbass_cut_hz = subbass_cut_hz;
    filter.delta_f = delta_f;
    filter.gains.resize(response_gains.size());

    const size_t n = response_gains.size();
    for (size_t k = 0; k < n; ++k) {
        const double f = bin_frequency(k, n, delta_f);
        const double h = response_gains[k];
        if (f < subbass_cut_hz || h + eps <= 0.0) {
            filter.gains[k] = 0.0;  // sub-bass zero band and the H=0, eps=0 guard
        } else {
            filter.gains[k] = c / (h + eps);
        }
    }
    return filter;
}

SpeakerProfile make_speaker_profile(const std::string& name,
                                    const std::function<double(double)>& gain_fn,
                                    int fs, size_t n_fft, uint64_t seed,
                                    const SpeakerOptions& opts) {
    if (fs <= 0) throw std::invalid_argument("non-positive sample rate");
    if (n_fft == 0 || (n_fft & (n_fft - 1)) != 0)
        throw std::invalid_argument("n_fft must be a power of two");

    const double nyquist = fs / 2.0;
    const double delta_f = static_cast<double>(fs) / static_cast<double>(n_fft);

    SpeakerProfile profile;
    profile.name = name;
    profile.delta_f = delta_f;
    profile.subbass_noise_level = opts.subbass_noise_level;
    profile.true_amplitude.assign(n_fft, 0.0);
    profile.true_phase.assign(n_fft, 0.0);

    // Smooth unknown-to-the-attacker phase response; the control points span
    // the measured speech band (phase varies where the driver's amplitude
    // response does) and hold the last value above it.
    const double phase_band = std::min(4000.0, nyquist);
    const CubicSpline phase_spline =
        random_smooth(SplitMix64::derive(seed, 1), 0.0, phase_band, 8);

    const size_t half = n_fft / 2;
    for (size_t k = 0; k <= half; ++k) {
        const double f = static_cast<double>(k) * delta_f;
        const double gain = gain_fn(f);
        if (!(gain >= 0.0) || !std::isfinite(gain))
            throw std::invalid_argument("gain function must return finite values >= 0");
        profile.true_amplitude[k] = gain;
        double psi = opts.phase_bound * phase_spline.eval(f);
        psi -= 2.0 * kPi * f * opts.delay_s;
        // Bins 0 and N/2 are self-conjugate and must stay phase-free.
        profile.true_phase[k] = (k == 0 || k == half) ? 0.0 : wrap_phase(psi);
    }
    for (size_t k = half + 1; k < n_fft; ++k) {
        profile.true_amplitude[k] = profile.true_amplitude[n_fft - k];
        profile.true_phase[k] = wrap_phase(-profile.true_phase[n_fft - k]);
    }
    return profile;
}

std::function<double(double)> preset_gain_fn(const std::string& preset, uint64_t seed) {
    if (preset == "flat") {
        return [](double) { return 1.0; };
    }

    // Irregular passband oscillations, a few dB deep like measured small
    // speakers: ~30 Hz structure below 1 kHz (near the bass grid's limit,
    // aliased by the coarser midrange grid) relaxing to ~300 Hz structure
    // above. The ripple is weighted by the base gain so the deep-suppression
    // region stays smooth.
    struct Ripple {
        CubicSpline lo, hi;
        double depth;
        double operator()(double f, double weight) const {
            const double mix = 1.0 / (1.0 + std::exp(-(f - 1000.0) / 250.0));
            const double r = (1.0 - mix) * lo.eval(f) + mix * hi.eval(f);
            return 1.0 + depth * std::min(1.0, std::max(0.0, weight)) * r;
        }
    };

    if (preset == "phone") {
        Ripple ripple{random_smooth(SplitMix64::derive(seed, 11), 0.0, 6000.0, 201),
                      random_smooth(SplitMix64::derive(seed, 12), 0.0, 24000.0, 81),
                      0.35};
        return [ripple](double f) {
            const double base = 0.02 + 0.98 * butterworth_hp(f, 500.0, 4);
            return base * ripple(f, base);
        };
    }
    if (preset == "two-way") {
        Ripple ripple{random_smooth(SplitMix64::derive(seed, 11), 0.0, 6000.0, 201),
                      random_smooth(SplitMix64::derive(seed, 12), 0.0, 24000.0, 81),
                      0.3};
        return [ripple](double f) {
            const double hp = butterworth_hp(f, 80.0, 2);
            const double base = hp * (0.4 + 0.75 * log_bump(f, 280.0, 0.55) +
                                      0.85 * log_bump(f, 2400.0, 0.6));
            return base * ripple(f, base);
        };
    }
    throw std::invalid_argument("unknown speaker preset: " + preset);
}

bool is_preset_speaker(const std::string& preset) {
    return preset == "flat" || preset == "phone" || preset == "two-way";
}

SpeakerProfile make_preset_speaker(const std::string& preset, int fs, size_t n_fft,
                                   uint64_t seed) {
    SpeakerOptions opts;
    if (preset == "flat") {
        // Ideal reference speaker: no phase shifts, no enclosure resonance.
        opts.phase_bound = 0.0;
        opts.subbass_noise_level = 0.0;
    }
    return make_speaker_profile(preset, preset_gain_fn(preset, seed), fs, n_fft, seed,
                                opts);
}

void save_profile(const std::filesystem::path& path, const SpeakerProfile& profile,
                  int fs) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << "# speaker " << profile.name << " fs=" << fs << "\n";
    const size_t half = profile.size() / 2;
    for (size_t k = 0; k <= half && k < profile.size(); ++k) {
        out << format_double(static_cast<double>(k) * profile.delta_f) << '\t'
            << format_double(profile.true_amplitude[k]) << '\t'
            << format_double(profile.true_phase[k]) << '\n';
    }
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

namespace {

struct ParsedResponseFile {
    std::string name;
    int fs = 0;
    std::vector<std::vector<double>> rows;
};

ParsedResponseFile parse_response_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");

    ParsedResponseFile parsed;
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error(path.string() + ": empty file");
    {
        std::istringstream hdr(line);
        std::string hash, keyword, fs_field;
        hdr >> hash >> keyword >> parsed.name >> fs_field;
        if (hash != "#" || keyword != "speaker" || fs_field.rfind("fs=", 0) != 0)
            throw std::runtime_error(path.string() + ": malformed header");
        parsed.fs = std::stoi(fs_field.substr(3));
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::vector<double> vals;
        double v;
        while (row >> v) vals.push_back(v);
        if (vals.size() < 2)
            throw std::runtime_error(path.string() + ": malformed row");
        parsed.rows.push_back(std::move(vals));
    }
    return parsed;
}

}  // namespace

SpeakerProfile load_profile(const std::filesystem::path& path) {
    const ParsedResponseFile parsed = parse_response_file(path);
    if (parsed.rows.size() < 2)
        throw std::runtime_error(path.string() + ": too few rows for a profile");
    for (const auto& row : parsed.rows)
        if (row.size() != 3)
            throw std::runtime_error(path.string() + ": profile rows need freq, gain, phase");

    const size_t half = parsed.rows.size() - 1;
    const size_t n_fft = half * 2;
    SpeakerProfile profile;
    profile.name = parsed.name;
    profile.delta_f = static_cast<double>(parsed.fs) / static_cast<double>(n_fft);
    profile.true_amplitude.assign(n_fft, 0.0);
    profile.true_phase.assign(n_fft, 0.0);
    for (size_t k = 0; k <= half; ++k) {
        profile.true_amplitude[k] = parsed.rows[k][1];
        profile.true_phase[k] = parsed.rows[k][2];
    }
    for (size_t k = half + 1; k < n_fft; ++k) {
        profile.true_amplitude[k] = profile.true_amplitude[n_fft - k];
        profile.true_phase[k] = wrap_phase(-profile.true_phase[n_fft - k]);
    }
    return profile;
}

void save_response(const std::filesystem::path& path, const std::string& name,
                   int fs, const DiscreteResponse& response) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << "# speaker " << name << " fs=" << fs << "\n";
    for (const auto& p : response.points)
        out << format_double(p.freq_hz) << '\t' << format_double(p.gain) << '\n';
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

DiscreteResponse load_response(const std::filesystem::path& path) {
    const ParsedResponseFile parsed = parse_response_file(path);
    DiscreteResponse response;
    for (const auto& row : parsed.rows) response.points.push_back({row[0], row[1]});
    return response;
}

}  // namespace replaymod
