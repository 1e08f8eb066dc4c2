// Copyright 2026 The Taches Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Runtime sweeps over impulse-response length and block size.
//
// Only the convolution kernel is timed: engine construction, noise
// generation, checksums and report assembly happen outside the clock.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <future>
#include <iomanip>
#include <locale>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <vector>

#include "taches/signal.hpp"
#include "taches/stream_engine.hpp"

namespace taches::bench {

/// Uniform white noise in [-1, 1), reproducible for a given seed.
inline Signal gen_white_noise(std::size_t duration, unsigned sample_rate,
                              std::uint64_t seed) {
  if (duration < 1) throw DomainError("noise duration must be at least 1 sample");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> s(duration);
  for (double& v : s) v = dist(rng);
  return Signal(std::move(s), sample_rate);
}

/// Block sizes of the reference buffer-size study: powers of two from 256
/// to 65536 plus one second at 44.1 kHz.
inline const std::vector<std::size_t> kReferenceBlockSizes{
    256, 512, 1024, 2048, 4096, 8192, 16384, 32768, 44100, 65536};

inline std::size_t ms_to_samples(double ms, unsigned sample_rate) {
  return static_cast<std::size_t>(std::llround(ms * sample_rate / 1000.0));
}

/// FNV-1a over the raw bytes of the samples; equal checksums for
/// bit-identical outputs.
inline std::uint64_t checksum(const Signal& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : s) {
    unsigned char b[sizeof v];
    std::memcpy(b, &v, sizeof v);
    for (unsigned char c : b) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

struct SweepSpec {
  std::vector<std::size_t> ir_lengths;  // samples, for run_ir_sweep
  Signal input;
  std::vector<std::size_t> nb_values{kDefaultBlockSize};
  std::size_t nb_ir_length = 0;         // samples, for run_nb_sweep
  int repetitions = 1;
  std::uint64_t rng_seed = 0;
  bool parallel = false;

  void validate() const {
    if (input.empty()) throw DomainError("sweep input is empty");
    if (nb_values.empty()) throw DomainError("no block sizes given");
    if (repetitions < 1) throw DomainError("repetitions must be at least 1");
    for (std::size_t nb : nb_values) {
      if (nb < 1) throw DomainError("block size must be at least 1");
    }
  }
};

struct Measurement {
  std::size_t ir_samples = 0;
  std::size_t nb = 0;
  int rep = 0;
  double wall_time_s = 0.0;
  double realtime_ratio = 0.0;
  std::uint64_t checksum = 0;
};

/// Median over the repetitions of one (ir_samples, nb) cell.
struct BenchRow {
  std::size_t ir_samples = 0;
  std::size_t nb = 0;
  double wall_time_s = 0.0;
  double realtime_ratio = 0.0;
  std::uint64_t checksum = 0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

struct BenchReport {
  double input_duration_s = 0.0;
  std::vector<Measurement> measurements;
  std::vector<BenchRow> rows;
  std::optional<LinearFit> linear_fit;           // ir sweeps only
  std::optional<double> limit_filter_length;     // samples; ir sweeps only
  bool outputs_identical = true;                 // nb sweeps only
  double wall_time_spread_percent = 0.0;         // nb sweeps only
};

namespace detail {

struct CellResult {
  std::vector<Measurement> measurements;
  Signal output;
};

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline CellResult time_cell(const Signal& input, const Signal& ir,
                            std::size_t nb, int reps) {
  CellResult cell;
  EngineConfig cfg;
  cfg.block_size = nb;
  cfg.tail_policy = TailPolicy::kAutoAppend;
  for (int rep = 0; rep < reps; ++rep) {
    StreamEngine engine(ir, cfg);
    const auto t0 = std::chrono::steady_clock::now();
    Signal out = engine.run(input);
    const auto t1 = std::chrono::steady_clock::now();
    const double wall =
        std::max(std::chrono::duration<double>(t1 - t0).count(), 1e-9);
    Measurement m;
    m.ir_samples = ir.size();
    m.nb = nb;
    m.rep = rep;
    m.wall_time_s = wall;
    m.realtime_ratio = wall / input.duration_seconds();
    m.checksum = checksum(out);
    cell.measurements.push_back(m);
    if (rep == 0) cell.output = std::move(out);
  }
  return cell;
}

inline BenchRow aggregate(const std::vector<Measurement>& ms, double duration) {
  std::vector<double> times;
  for (const Measurement& m : ms) times.push_back(m.wall_time_s);
  BenchRow row;
  row.ir_samples = ms.front().ir_samples;
  row.nb = ms.front().nb;
  row.wall_time_s = median(std::move(times));
  row.realtime_ratio = row.wall_time_s / duration;
  row.checksum = ms.front().checksum;
  return row;
}

// Runs `count` independent cells, optionally one task per cell.
template <typename F>
std::vector<CellResult> run_cells(std::size_t count, bool parallel, F&& cell) {
  std::vector<CellResult> out(count);
  if (!parallel) {
    for (std::size_t i = 0; i < count; ++i) out[i] = cell(i);
    return out;
  }
  std::vector<std::future<CellResult>> tasks;
  for (std::size_t i = 0; i < count; ++i) {
    tasks.push_back(std::async(std::launch::async, cell, i));
  }
  for (std::size_t i = 0; i < count; ++i) out[i] = tasks[i].get();
  return out;
}

// Sorted distinct lengths with the mean wall time of duplicates.
inline std::vector<std::pair<double, double>> normalized_points(
    const std::vector<BenchRow>& rows) {
  std::map<std::size_t, std::pair<double, int>> acc;
  for (const BenchRow& r : rows) {
    auto& [sum, n] = acc[r.ir_samples];
    sum += r.wall_time_s;
    ++n;
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& [len, sn] : acc) {
    pts.emplace_back(static_cast<double>(len), sn.first / sn.second);
  }
  return pts;
}

}  // namespace detail

/// Least-squares fit of wall time against IR length; none with fewer than
/// two distinct lengths.
inline std::optional<LinearFit> fit_wall_time(const std::vector<BenchRow>& rows) {
  std::vector<double> xs, ys;
  for (const BenchRow& r : rows) {
    xs.push_back(static_cast<double>(r.ir_samples));
    ys.push_back(r.wall_time_s);
  }
  const double n = static_cast<double>(xs.size());
  if (xs.empty() || std::all_of(xs.begin(), xs.end(),
                                [&](double x) { return x == xs.front(); })) {
    return std::nullopt;
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return fit;
}

/// IR length at which the (linearly interpolated) wall time reaches the
/// input duration, i.e. realtime_ratio == 1. None when every row is faster
/// than real time. If even the shortest IR is too slow its length is
/// returned.
inline std::optional<double> find_realtime_limit(const BenchReport& report,
                                                 double input_duration) {
  const auto pts = detail::normalized_points(report.rows);
  if (pts.size() < 2) {
    throw DomainError("real-time limit needs at least two distinct IR lengths");
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].second < input_duration) continue;
    if (i == 0) return pts[0].first;
    const auto [x0, y0] = pts[i - 1];
    const auto [x1, y1] = pts[i];
    return x0 + (input_duration - y0) * (x1 - x0) / (y1 - y0);
  }
  return std::nullopt;
}

/// One cell per IR length (white-noise IR seeded from rng_seed and the
/// length), processed with the first entry of nb_values as block size.
inline BenchReport run_ir_sweep(const SweepSpec& spec) {
  spec.validate();
  if (spec.ir_lengths.empty()) throw DomainError("no IR lengths given");
  BenchReport report;
  report.input_duration_s = spec.input.duration_seconds();
  const unsigned rate = spec.input.sample_rate();
  const std::size_t nb = spec.nb_values.front();

  auto cells = detail::run_cells(
      spec.ir_lengths.size(), spec.parallel, [&](std::size_t i) {
        const std::size_t len = spec.ir_lengths[i];
        const Signal ir = gen_white_noise(len, rate, spec.rng_seed + len);
        return detail::time_cell(spec.input, ir, nb, spec.repetitions);
      });
  for (auto& cell : cells) {
    report.measurements.insert(report.measurements.end(),
                               cell.measurements.begin(), cell.measurements.end());
    report.rows.push_back(detail::aggregate(cell.measurements, report.input_duration_s));
  }
  report.linear_fit = fit_wall_time(report.rows);
  if (detail::normalized_points(report.rows).size() >= 2) {
    report.limit_filter_length = find_realtime_limit(report, report.input_duration_s);
  }
  return report;
}

/// One cell per block size at a fixed IR length. Outputs of every cell are
/// compared bit for bit against the first.
inline BenchReport run_nb_sweep(const SweepSpec& spec) {
  spec.validate();
  if (spec.nb_ir_length < 1) throw DomainError("nb sweep needs an IR length");
  BenchReport report;
  report.input_duration_s = spec.input.duration_seconds();
  const Signal ir = gen_white_noise(spec.nb_ir_length, spec.input.sample_rate(),
                                    spec.rng_seed + spec.nb_ir_length);

  auto cells = detail::run_cells(
      spec.nb_values.size(), spec.parallel, [&](std::size_t i) {
        return detail::time_cell(spec.input, ir, spec.nb_values[i], spec.repetitions);
      });
  const std::vector<double>& reference = cells.front().output.vector();
  for (auto& cell : cells) {
    const std::vector<double>& out = cell.output.vector();
    if (out.size() != reference.size() ||
        std::memcmp(out.data(), reference.data(), out.size() * sizeof(double)) != 0) {
      report.outputs_identical = false;
    }
    report.measurements.insert(report.measurements.end(),
                               cell.measurements.begin(), cell.measurements.end());
    report.rows.push_back(detail::aggregate(cell.measurements, report.input_duration_s));
  }
  const auto [lo, hi] = std::minmax_element(
      report.rows.begin(), report.rows.end(),
      [](const BenchRow& a, const BenchRow& b) { return a.wall_time_s < b.wall_time_s; });
  report.wall_time_spread_percent =
      100.0 * (hi->wall_time_s - lo->wall_time_s) / lo->wall_time_s;
  return report;
}

/// `ir_samples,nb,rep,wall_time_s,realtime_ratio`, one line per measurement.
inline void write_csv(std::ostream& os, const BenchReport& report) {
  std::ostringstream ss;
  ss.imbue(std::locale::classic());
  ss << "ir_samples,nb,rep,wall_time_s,realtime_ratio\n";
  ss << std::setprecision(9);
  for (const Measurement& m : report.measurements) {
    ss << m.ir_samples << ',' << m.nb << ',' << m.rep << ',' << m.wall_time_s
       << ',' << m.realtime_ratio << '\n';
  }
  os << ss.str();
}

/// Whitespace-separated median curve for gnuplot, with the real-time
/// threshold as a third column.
inline void write_gnuplot(std::ostream& os, const BenchReport& report) {
  std::ostringstream ss;
  ss.imbue(std::locale::classic());
  ss << "# kernel-only timing (no file I/O)\n"
     << "# ir_samples wall_time_s input_duration_s\n"
     << std::setprecision(9);
  for (const BenchRow& r : report.rows) {
    ss << r.ir_samples << ' ' << r.wall_time_s << ' ' << report.input_duration_s
       << '\n';
  }
  os << ss.str();
}

}  // namespace taches::bench
