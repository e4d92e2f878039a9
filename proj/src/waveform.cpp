// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - multi-tone sounding waveform synthesis and PAPR optimization

#include "mmsounder/waveform.hpp"
#include "mmsounder/fft.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace mmsounder {

namespace {

double wrap_2pi(double a)
{
    a = std::fmod(a, 2.0 * pi);
    if (a < 0.0)
        a += 2.0 * pi;
    return a;
}

// Place unit-magnitude tones with the given phases on the DFT grid and
// transform to one time period. No amplitude normalization here.
cvector tones_to_time(const MultitoneSpec &spec, const std::vector<double> &phases)
{
    const int P = spec.period_samples();
    const int b0 = spec.first_bin();
    cvector X(P, cdouble(0.0, 0.0));
    for (int k = 0; k < spec.num_tones; ++k)
        X[(b0 + k) % P] = std::polar(1.0, phases[k]);
    cvector x = ifft(X);
    for (auto &v : x)
        v *= (double)P; // undo 1/N so each tone has unit amplitude in time
    return x;
}

std::vector<double> phases_or_zero(const MultitoneSpec &spec)
{
    if (spec.phases_rad.empty())
        return std::vector<double>(spec.num_tones, 0.0);
    return spec.phases_rad;
}

// One clipping-and-filtering pass: clip the envelope to its RMS radius,
// then take the phases of the resulting spectrum on the tone bins.
std::vector<double> clip_and_project(const MultitoneSpec &spec, const cvector &x)
{
    double mean_p = 0.0;
    for (const auto &v : x)
        mean_p += std::norm(v);
    mean_p /= (double)x.size();
    const double clip = std::sqrt(mean_p);

    cvector y(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        const double a = std::abs(x[i]);
        y[i] = (a > clip) ? x[i] * (clip / a) : x[i];
    }
    cvector Y = fft(y);
    const int b0 = spec.first_bin();
    const int P = spec.period_samples();
    std::vector<double> ph(spec.num_tones);
    for (int k = 0; k < spec.num_tones; ++k)
        ph[k] = std::arg(Y[(b0 + k) % P]);
    return ph;
}

struct cf_result {
    std::vector<double> phases;
    double papr = 1e30;
};

// Run the clip-and-filter loop from one starting point. Tracks the best
// phases seen; stops at the target, on stalled improvement, or at max_iters.
cf_result run_clip_filter(const MultitoneSpec &spec, std::vector<double> start,
                          double target_papr_db, int max_iters)
{
    cf_result best;
    std::vector<double> ph = std::move(start);
    double prev = 1e30;
    for (int it = 0; it < max_iters; ++it) {
        const cvector x = tones_to_time(spec, ph);
        const double p = papr_db_oversampled(x, 4);
        if (p < best.papr) {
            best.papr = p;
            best.phases = ph;
        }
        if (best.papr <= target_papr_db)
            break;
        if (prev - p < 1e-3 && it > 0)
            break;
        prev = p;
        ph = clip_and_project(spec, x);
    }
    return best;
}

} // namespace

void MultitoneSpec::validate() const
{
    if (num_tones < 1 || num_tones % 2 == 0)
        throw std::invalid_argument("MultitoneSpec: num_tones must be odd and >= 1");
    if (tone_spacing_hz <= 0.0 || sample_rate_hz <= 0.0)
        throw std::invalid_argument("MultitoneSpec: tone_spacing_hz and sample_rate_hz must be > 0");
    if (first_tone_hz < 0.0)
        throw std::invalid_argument("MultitoneSpec: first_tone_hz must be >= 0");

    const double p = sample_rate_hz / tone_spacing_hz;
    if (std::abs(p - std::round(p)) > 1e-6)
        throw std::invalid_argument("MultitoneSpec: sample_rate_hz must be an integer multiple of tone_spacing_hz");
    const double b = first_tone_hz / tone_spacing_hz;
    if (std::abs(b - std::round(b)) > 1e-6)
        throw std::invalid_argument("MultitoneSpec: first_tone_hz must lie on the tone grid");

    const double top = first_tone_hz + (num_tones - 1) * tone_spacing_hz;
    if (!(top < sample_rate_hz / 2.0))
        throw std::invalid_argument("MultitoneSpec: tone grid exceeds the Nyquist frequency");

    if (!phases_rad.empty() && (int)phases_rad.size() != num_tones)
        throw std::invalid_argument("MultitoneSpec: phases_rad size must equal num_tones");
}

int MultitoneSpec::period_samples() const
{
    return (int)std::llround(sample_rate_hz / tone_spacing_hz);
}

int MultitoneSpec::first_bin() const
{
    return (int)std::llround(first_tone_hz / tone_spacing_hz);
}

double papr_db(const cvector &samples)
{
    if (samples.empty())
        throw std::invalid_argument("papr_db: empty input");
    double peak = 0.0, mean = 0.0;
    for (const auto &v : samples) {
        const double p = std::norm(v);
        peak = std::max(peak, p);
        mean += p;
    }
    mean /= (double)samples.size();
    if (mean <= 0.0)
        throw std::invalid_argument("papr_db: all-zero input has undefined power");
    return 10.0 * std::log10(peak / mean);
}

double papr_db_oversampled(const cvector &samples, int factor)
{
    if (factor < 1)
        throw std::invalid_argument("papr_db_oversampled: factor must be >= 1");
    if (factor == 1)
        return papr_db(samples);

    const size_t n = samples.size();
    cvector X = fft(samples);
    cvector Xz(n * (size_t)factor, cdouble(0.0, 0.0));
    // keep bins below Nyquist in place, move the upper half to negative bins
    for (size_t k = 0; k < n; ++k) {
        if (k < (n + 1) / 2)
            Xz[k] = X[k];
        else
            Xz[k + (factor - 1) * n] = X[k];
    }
    cvector x = ifft(Xz);
    for (auto &v : x)
        v *= (double)factor; // keep the original amplitude scale
    return papr_db(x);
}

MultitoneWaveform synthesize(const MultitoneSpec &spec)
{
    spec.validate();
    MultitoneWaveform w;
    w.spec = spec;
    w.spec.phases_rad = phases_or_zero(spec);
    for (auto &p : w.spec.phases_rad)
        p = wrap_2pi(p);

    w.samples = tones_to_time(w.spec, w.spec.phases_rad);
    double peak = 0.0;
    for (const auto &v : w.samples)
        peak = std::max(peak, std::abs(v));
    for (auto &v : w.samples)
        v /= peak;
    w.papr_db = papr_db(w.samples);
    return w;
}

MultitoneSpec optimize_phases(const MultitoneSpec &spec, double target_papr_db,
                              int max_iters, uint64_t seed)
{
    spec.validate();
    if (max_iters < 1)
        throw std::invalid_argument("optimize_phases: max_iters must be >= 1");

    std::vector<double> input = phases_or_zero(spec);
    if (spec.num_tones == 1) {
        MultitoneSpec out = spec;
        out.phases_rad = {wrap_2pi(input[0])};
        return out;
    }

    const double input_papr = papr_db_oversampled(tones_to_time(spec, input), 4);

    // Starting points: the input itself, a quadratic (chirp-like) ramp that
    // is known to land near the optimum for large tone counts, and two
    // seeded random draws as insurance for small grids.
    std::vector<std::vector<double>> starts;
    starts.push_back(input);
    std::vector<double> quad(spec.num_tones);
    for (int k = 0; k < spec.num_tones; ++k)
        quad[k] = pi * (double)k * (double)k / (double)spec.num_tones;
    starts.push_back(std::move(quad));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-pi, pi);
    for (int r = 0; r < 2; ++r) {
        std::vector<double> rnd(spec.num_tones);
        for (auto &v : rnd)
            v = uni(rng);
        starts.push_back(std::move(rnd));
    }

    cf_result best;
    best.phases = input;
    best.papr = input_papr;
    for (auto &s : starts) {
        cf_result r = run_clip_filter(spec, std::move(s), target_papr_db, max_iters);
        if (r.papr < best.papr)
            best = std::move(r);
        if (best.papr <= target_papr_db)
            break;
    }

    MultitoneSpec out = spec;
    out.phases_rad.resize(spec.num_tones);
    for (int k = 0; k < spec.num_tones; ++k)
        out.phases_rad[k] = wrap_2pi(best.phases[k]);
    return out;
}

std::vector<double> zadoff_chu_phases(int length, int root)
{
    if (length < 1)
        throw std::invalid_argument("zadoff_chu_phases: length must be >= 1");
    if (root <= 0 || root >= length || std::gcd(root, length) != 1)
        throw std::invalid_argument("zadoff_chu_phases: root must be in (0, length) and coprime with length");
    std::vector<double> ph(length);
    for (int k = 0; k < length; ++k) {
        // k(k+1) mod 2*length keeps the argument small and exact
        const long long m = ((long long)k * (k + 1)) % (2LL * length);
        ph[k] = wrap_2pi(-pi * (double)root * (double)m / (double)length);
    }
    return ph;
}

MultitoneWaveform zadoff_chu_baseline(int length, int root, double sample_rate_hz,
                                      double bandwidth_hz)
{
    if (bandwidth_hz <= 0.0 || sample_rate_hz < bandwidth_hz)
        throw std::invalid_argument("zadoff_chu_baseline: need sample_rate_hz >= bandwidth_hz > 0");
    const std::vector<double> ph = zadoff_chu_phases(length, root);

    const double df = bandwidth_hz / (double)length;
    const double pf = sample_rate_hz / df;
    if (std::abs(pf - std::round(pf)) > 1e-6)
        throw std::invalid_argument("zadoff_chu_baseline: sample_rate_hz must be an integer multiple of bandwidth_hz/length");
    const int P = (int)std::llround(pf);

    // Symbol-per-tone mapping, band centered roughly like the sounding grid
    // when oversampled; for critical sampling the grid wraps the whole DFT.
    int b0 = 0;
    if (P > length)
        b0 = (P / 2 - length) / 2 > 0 ? (P / 2 - length) / 2 : 0;

    cvector X(P, cdouble(0.0, 0.0));
    for (int k = 0; k < length; ++k)
        X[(b0 + k) % P] = std::polar(1.0, ph[k]);
    cvector x = ifft(X);
    for (auto &v : x)
        v *= (double)P;

    MultitoneWaveform w;
    w.spec.num_tones = length;
    w.spec.tone_spacing_hz = df;
    w.spec.first_tone_hz = b0 * df;
    w.spec.sample_rate_hz = sample_rate_hz;
    w.spec.phases_rad = ph;
    double peak = 0.0;
    for (const auto &v : x)
        peak = std::max(peak, std::abs(v));
    for (auto &v : x)
        v /= peak;
    w.samples = std::move(x);
    w.papr_db = papr_db(w.samples);
    return w;
}

void write_waveform_spec(const MultitoneSpec &spec, const std::string &path)
{
    spec.validate();
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("write_waveform_spec: cannot open " + path);
    f.precision(12);
    f << "num_tones=" << spec.num_tones << "\n";
    f << "tone_spacing_hz=" << spec.tone_spacing_hz << "\n";
    f << "first_tone_hz=" << spec.first_tone_hz << "\n";
    f << "sample_rate_hz=" << spec.sample_rate_hz << "\n";
    f << "phases\n";
    const std::vector<double> ph = phases_or_zero(spec);
    for (double p : ph)
        f << p << "\n";
    if (!f)
        throw std::runtime_error("write_waveform_spec: write failed for " + path);
}

MultitoneSpec read_waveform_spec(const std::string &path)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("read_waveform_spec: cannot open " + path);
    MultitoneSpec spec;
    spec.phases_rad.clear();
    std::string line;
    bool in_phases = false;
    while (std::getline(f, line)) {
        if (line.empty())
            continue;
        if (in_phases) {
            spec.phases_rad.push_back(std::stod(line));
            continue;
        }
        if (line == "phases") {
            in_phases = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("read_waveform_spec: malformed line '" + line + "'");
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "num_tones")
            spec.num_tones = std::stoi(val);
        else if (key == "tone_spacing_hz")
            spec.tone_spacing_hz = std::stod(val);
        else if (key == "first_tone_hz")
            spec.first_tone_hz = std::stod(val);
        else if (key == "sample_rate_hz")
            spec.sample_rate_hz = std::stod(val);
        else
            throw std::runtime_error("read_waveform_spec: unknown key '" + key + "'");
    }
    spec.validate();
    return spec;
}

} // namespace mmsounder
