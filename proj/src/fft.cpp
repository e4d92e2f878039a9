// SPDX-License-Identifier: Apache-2.0
//
// mmsounder - thin FFT facade over FFTW3 with a process-wide plan cache

#include "mmsounder/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace mmsounder {

namespace {

// FFTW planning is not thread safe; executing a plan on its own buffers is.
// We keep one plan + buffer pair per (size, direction) behind a mutex and
// serialize execution, which is plenty for the sizes this project uses.
struct plan_entry {
    fftw_plan plan = nullptr;
    fftw_complex *in = nullptr;
    fftw_complex *out = nullptr;
};

std::mutex g_fft_mutex;
std::map<std::pair<size_t, int>, plan_entry> g_plans;

plan_entry &get_plan(size_t n, int sign)
{
    auto key = std::make_pair(n, sign);
    auto it = g_plans.find(key);
    if (it != g_plans.end())
        return it->second;

    plan_entry e;
    e.in = fftw_alloc_complex(n);
    e.out = fftw_alloc_complex(n);
    if (e.in == nullptr || e.out == nullptr)
        throw std::bad_alloc();
    e.plan = fftw_plan_dft_1d((int)n, e.in, e.out, sign, FFTW_ESTIMATE);
    if (e.plan == nullptr)
        throw std::runtime_error("fftw_plan_dft_1d failed for n = " + std::to_string(n));
    return g_plans.emplace(key, e).first->second;
}

cvector run(const cvector &x, int sign)
{
    if (x.empty())
        throw std::invalid_argument("fft: input must not be empty");

    std::lock_guard<std::mutex> lock(g_fft_mutex);
    plan_entry &e = get_plan(x.size(), sign);
    for (size_t i = 0; i < x.size(); ++i) {
        e.in[i][0] = x[i].real();
        e.in[i][1] = x[i].imag();
    }
    fftw_execute(e.plan);
    cvector y(x.size());
    for (size_t i = 0; i < x.size(); ++i)
        y[i] = cdouble(e.out[i][0], e.out[i][1]);
    return y;
}

} // namespace

cvector fft(const cvector &x) { return run(x, FFTW_FORWARD); }

cvector ifft(const cvector &X)
{
    cvector y = run(X, FFTW_BACKWARD);
    const double s = 1.0 / (double)y.size();
    for (auto &v : y)
        v *= s;
    return y;
}

} // namespace mmsounder
