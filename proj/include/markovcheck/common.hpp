#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace markovcheck {

// Complex value carried as an explicit (re, im) pair.
struct Cplx {
    double re = 0.0;
    double im = 0.0;

    friend Cplx operator+(Cplx a, Cplx b) { return {a.re + b.re, a.im + b.im}; }
    friend Cplx operator-(Cplx a, Cplx b) { return {a.re - b.re, a.im - b.im}; }
    friend Cplx operator*(Cplx a, Cplx b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend Cplx operator*(double s, Cplx a) { return {s * a.re, s * a.im}; }
    friend Cplx operator/(Cplx a, double s) { return {a.re / s, a.im / s}; }
    Cplx& operator+=(Cplx b) {
        re += b.re;
        im += b.im;
        return *this;
    }
};

double modulus(Cplx z);

// e^{i theta} as (cos, sin)
Cplx unit_phase(double theta);

// Malformed or inconsistent input data (files, rows, domains). CLI exit 3.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numeric failure (non-finite results, impossible configuration). CLI exit 4.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// splitmix64 step; the standard 64-bit finalizer-based generator.
std::uint64_t splitmix64(std::uint64_t& state);

// Derive an independent substream seed from (base, stream tag, index).
// Deterministic; distinct (stream, index) pairs give unrelated seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

// Run fn(i) for i in [0, count) across up to `threads` workers
// (0 = hardware concurrency). Each index writes only its own outputs, so the
// result is independent of the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                  int threads = 0);

int resolve_thread_count(int requested);

}  // namespace markovcheck
