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

// Command-line front end: `convolve`, `bench` and `quant`.
//
// Exit codes: 0 success, 1 I/O failure, 2 bad arguments.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <locale>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "taches/audio_io.hpp"
#include "taches/bench.hpp"
#include "taches/quant_model.hpp"
#include "taches/signal.hpp"
#include "taches/stream_engine.hpp"

namespace taches::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitUsage = 2;

/// Raised for flag values that parse but make no sense.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SwapPoint {
  std::string path;
  std::uint64_t at_sample = 0;
};

/// Parses `path@sample`; the split is on the last '@'.
inline SwapPoint parse_swap(const std::string& text) {
  const auto at = text.rfind('@');
  if (at == std::string::npos || at == 0 || at + 1 == text.size()) {
    throw UsageError("--swap-ir expects path@sample, got '" + text + "'");
  }
  const std::string num = text.substr(at + 1);
  if (!std::all_of(num.begin(), num.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw UsageError("--swap-ir sample index is not a non-negative integer: '" +
                     num + "'");
  }
  return {text.substr(0, at), std::stoull(num)};
}

struct IrSweepRange {
  double start_ms = 0;
  double stop_ms = 0;
  double step_ms = 0;
};

/// Parses `a:b:step` (milliseconds, inclusive of b).
inline IrSweepRange parse_ir_sweep(const std::string& text) {
  IrSweepRange r;
  char c1 = 0, c2 = 0;
  std::istringstream ss(text);
  ss.imbue(std::locale::classic());
  if (!(ss >> r.start_ms >> c1 >> r.stop_ms >> c2 >> r.step_ms) || c1 != ':' ||
      c2 != ':' || !(ss >> std::ws).eof()) {
    throw UsageError("--ir-sweep expects start:stop:step in ms, got '" + text + "'");
  }
  if (!(r.start_ms > 0) || !(r.step_ms > 0) || r.stop_ms < r.start_ms) {
    throw UsageError("--ir-sweep needs 0 < start <= stop and step > 0, got '" +
                     text + "'");
  }
  return r;
}

inline std::vector<std::size_t> ir_sweep_lengths(const IrSweepRange& r,
                                                 unsigned sample_rate) {
  std::vector<std::size_t> out;
  const auto steps = static_cast<long>(std::floor((r.stop_ms - r.start_ms) / r.step_ms + 1e-9));
  for (long i = 0; i <= steps; ++i) {
    const std::size_t n = bench::ms_to_samples(r.start_ms + i * r.step_ms, sample_rate);
    out.push_back(std::max<std::size_t>(n, 1));
  }
  return out;
}

namespace detail {

inline std::vector<Signal> pick_ir_channels(const audio::WavData& ir,
                                            const std::string& path,
                                            std::size_t input_channels) {
  if (ir.channels.size() == input_channels) return ir.channels;
  if (ir.channels.size() == 1) {
    return std::vector<Signal>(input_channels, ir.channels.front());
  }
  throw UsageError(path + ": " + std::to_string(ir.channels.size()) +
                   " channels cannot be applied to a " +
                   std::to_string(input_channels) + "-channel input");
}

struct ConvolveArgs {
  std::string input;
  std::string ir;
  std::string output;
  std::size_t nb = kDefaultBlockSize;
  bool no_tail = false;
  std::vector<std::string> swaps;
  std::optional<double> normalize;
  double zero_skip = 0.0;
  std::string encoding = "float32";
};

inline int cmd_convolve(const ConvolveArgs& a, std::ostream& out, std::ostream& err) {
  if (a.nb < 1) throw UsageError("--nb must be at least 1");
  if (!(a.zero_skip >= 0)) throw UsageError("--zero-skip must be non-negative");
  if (a.normalize && !(*a.normalize > 0)) {
    throw UsageError("--normalize target must be positive");
  }
  static const std::map<std::string, audio::Encoding> encodings{
      {"pcm16", audio::Encoding::kPcm16},
      {"pcm24", audio::Encoding::kPcm24},
      {"float32", audio::Encoding::kFloat32}};
  const auto enc = encodings.find(a.encoding);
  if (enc == encodings.end()) throw UsageError("--encoding: unknown '" + a.encoding + "'");

  std::vector<SwapPoint> swaps;
  for (const std::string& s : a.swaps) swaps.push_back(parse_swap(s));
  std::stable_sort(swaps.begin(), swaps.end(),
                   [](const SwapPoint& x, const SwapPoint& y) { return x.at_sample < y.at_sample; });

  const audio::WavData input = audio::read_wav(a.input);
  const audio::WavData ir = audio::read_wav(a.ir);
  const unsigned rate = input.spec.sample_rate;
  if (ir.spec.sample_rate != rate) {
    throw UsageError("sample rate mismatch: " + a.input + " is " +
                     std::to_string(rate) + " Hz, " + a.ir + " is " +
                     std::to_string(ir.spec.sample_rate) + " Hz");
  }
  const std::size_t n_chan = input.channels.size();
  const std::size_t n_in = input.channels.front().size();
  if (n_in == 0) throw UsageError(a.input + ": no samples");

  std::vector<std::vector<Signal>> swap_irs;
  for (const SwapPoint& s : swaps) {
    if (s.at_sample > n_in) {
      throw UsageError("--swap-ir index " + std::to_string(s.at_sample) +
                       " is past the end of " + a.input + " (" +
                       std::to_string(n_in) + " samples)");
    }
    const audio::WavData w = audio::read_wav(s.path);
    if (w.spec.sample_rate != rate) {
      throw UsageError("sample rate mismatch: " + s.path + " is " +
                       std::to_string(w.spec.sample_rate) + " Hz, expected " +
                       std::to_string(rate) + " Hz");
    }
    swap_irs.push_back(pick_ir_channels(w, s.path, n_chan));
  }
  const std::vector<Signal> irs = pick_ir_channels(ir, a.ir, n_chan);

  EngineConfig cfg;
  cfg.block_size = a.nb;
  cfg.zero_skip_threshold = a.zero_skip;
  std::vector<Signal> result;
  for (std::size_t c = 0; c < n_chan; ++c) {
    StreamEngine engine(irs[c], cfg);
    const std::span<const double> in = input.channels[c].samples();
    std::vector<double> y(n_in);
    std::size_t pos = 0;
    std::size_t next_swap = 0;
    while (pos < n_in) {
      while (next_swap < swaps.size() && swaps[next_swap].at_sample == pos) {
        engine.swap_ir(swap_irs[next_swap][c]);
        ++next_swap;
      }
      std::size_t end = std::min(n_in, pos + a.nb);
      if (next_swap < swaps.size()) {
        end = std::min<std::size_t>(end, swaps[next_swap].at_sample);
      }
      engine.process_block(in.subspan(pos, end - pos),
                           std::span<double>(y).subspan(pos, end - pos));
      pos = end;
    }
    // Swaps scheduled exactly at the end of the input only affect later
    // input, of which there is none.
    if (!a.no_tail) {
      const Signal tail = engine.flush();
      y.insert(y.end(), tail.begin(), tail.end());
    }
    result.emplace_back(std::move(y), rate);
  }
  // Channels may end with different tail lengths after swaps; pad to match.
  std::size_t longest = 0;
  for (const Signal& s : result) longest = std::max(longest, s.size());
  for (Signal& s : result) s.vector().resize(longest, 0.0);

  if (a.normalize) {
    double peak = 0.0;
    for (const Signal& s : result) {
      for (double v : s) peak = std::max(peak, std::abs(v));
    }
    if (peak > 0) {
      const double g = *a.normalize / peak;
      for (Signal& s : result) {
        for (double& v : s.vector()) v *= g;
      }
    }
  }

  audio::WavSpec spec{rate, static_cast<unsigned>(n_chan), enc->second};
  const audio::WriteStats ws = audio::write_wav(a.output, result, spec);
  if (ws.clipped > 0) {
    err << "warning: " << ws.clipped << " samples clipped in " << a.output << "\n";
  }
  out << "wrote " << a.output << ": " << n_chan << " channel(s), " << longest
      << " samples (" << n_in << " body + " << (longest - n_in) << " tail), "
      << audio::to_string(enc->second) << "\n";
  return kExitOk;
}

struct BenchArgs {
  std::string ir_sweep;
  std::vector<std::size_t> nb_sweep;
  std::string input = "noise:10";
  unsigned sample_rate = kDefaultSampleRate;
  std::uint64_t seed = 0;
  int reps = 3;
  std::size_t nb = kDefaultBlockSize;
  double nb_ir_ms = 100.0;
  std::string csv;
  std::string gnuplot;
  bool parallel = false;
};

inline Signal bench_input(const BenchArgs& a) {
  const std::string prefix = "noise:";
  if (a.input.rfind(prefix, 0) == 0) {
    double seconds = 0;
    std::istringstream ss(a.input.substr(prefix.size()));
    ss.imbue(std::locale::classic());
    if (!(ss >> seconds) || !(ss >> std::ws).eof() || !(seconds > 0)) {
      throw UsageError("--input noise:<seconds> needs a positive duration, got '" +
                       a.input + "'");
    }
    const auto n = static_cast<std::size_t>(std::llround(seconds * a.sample_rate));
    return bench::gen_white_noise(std::max<std::size_t>(n, 1), a.sample_rate,
                                  a.seed);
  }
  audio::WavData w = audio::read_wav(a.input);
  if (w.channels.front().empty()) throw UsageError(a.input + ": no samples");
  return w.channels.front();
}

inline void print_rows(std::ostream& out, const bench::BenchReport& r, unsigned rate) {
  out << std::setw(10) << "ir_samples" << std::setw(10) << "ir_ms" << std::setw(8)
      << "nb" << std::setw(14) << "wall_time_s" << std::setw(10) << "ratio"
      << "  checksum\n";
  for (const bench::BenchRow& row : r.rows) {
    out << std::setw(10) << row.ir_samples << std::setw(10) << std::fixed
        << std::setprecision(1) << 1000.0 * row.ir_samples / rate << std::setw(8)
        << row.nb << std::setw(14) << std::setprecision(6) << row.wall_time_s
        << std::setw(10) << std::setprecision(4) << row.realtime_ratio << "  "
        << std::hex << std::setw(16) << std::setfill('0') << row.checksum
        << std::dec << std::setfill(' ') << "\n";
  }
  out.unsetf(std::ios::floatfield);
}

inline int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (a.ir_sweep.empty() && a.nb_sweep.empty()) {
    throw UsageError("bench needs --ir-sweep and/or --nb-sweep");
  }
  if (a.reps < 1) throw UsageError("--reps must be at least 1");
  if (a.nb < 1) throw UsageError("--nb must be at least 1");
  if (!(a.nb_ir_ms > 0)) throw UsageError("--ir-ms must be positive");
  for (std::size_t nb : a.nb_sweep) {
    if (nb < 1) throw UsageError("--nb-sweep values must be at least 1");
  }
  std::optional<IrSweepRange> range;
  if (!a.ir_sweep.empty()) range = parse_ir_sweep(a.ir_sweep);

  bench::SweepSpec spec;
  spec.input = bench_input(a);
  const unsigned rate = spec.input.sample_rate();
  spec.repetitions = a.reps;
  spec.rng_seed = a.seed;
  spec.parallel = a.parallel;

  out << "input: " << spec.input.size() << " samples at " << rate << " Hz ("
      << spec.input.duration_seconds() << " s); kernel-only timing, median of "
      << a.reps << " run(s)\n";

  bench::BenchReport combined;
  combined.input_duration_s = spec.input.duration_seconds();
  if (range) {
    spec.ir_lengths = ir_sweep_lengths(*range, rate);
    spec.nb_values = {a.nb};
    const bench::BenchReport r = bench::run_ir_sweep(spec);
    out << "IR-length sweep (nb " << a.nb << ")\n";
    print_rows(out, r, rate);
    if (r.linear_fit) {
      out << "linear fit: slope " << r.linear_fit->slope << " s/sample, intercept "
          << r.linear_fit->intercept << " s, r_squared " << r.linear_fit->r_squared
          << "\n";
    } else {
      out << "linear fit: none (fewer than two IR lengths)\n";
    }
    if (r.limit_filter_length) {
      out << "real-time limit: " << *r.limit_filter_length << " samples ("
          << 1000.0 * *r.limit_filter_length / rate << " ms)\n";
    } else {
      out << "real-time limit: none (every IR length ran faster than real time)\n";
    }
    combined.measurements = r.measurements;
    combined.rows = r.rows;
  }
  bool identical = true;
  if (!a.nb_sweep.empty()) {
    spec.nb_values = a.nb_sweep;
    spec.nb_ir_length = std::max<std::size_t>(bench::ms_to_samples(a.nb_ir_ms, rate), 1);
    const bench::BenchReport r = bench::run_nb_sweep(spec);
    out << "block-size sweep (IR " << spec.nb_ir_length << " samples)\n";
    print_rows(out, r, rate);
    out << "outputs bit-identical across nb: " << (r.outputs_identical ? "yes" : "NO")
        << "\nwall-time spread: " << std::fixed << std::setprecision(2)
        << r.wall_time_spread_percent << " %\n";
    out.unsetf(std::ios::floatfield);
    identical = r.outputs_identical;
    combined.measurements.insert(combined.measurements.end(), r.measurements.begin(),
                                 r.measurements.end());
    combined.rows.insert(combined.rows.end(), r.rows.begin(), r.rows.end());
  }

  if (!a.csv.empty()) {
    std::ofstream f(a.csv, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(a.csv + ": cannot open for writing");
    bench::write_csv(f, combined);
    if (!f) throw IoError(a.csv + ": write failed");
  }
  if (!a.gnuplot.empty()) {
    std::ofstream f(a.gnuplot, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(a.gnuplot + ": cannot open for writing");
    bench::write_gnuplot(f, combined);
    if (!f) throw IoError(a.gnuplot + ": write failed");
  }
  return identical ? kExitOk : kExitIo;
}

struct QuantArgs {
  int bits = 0;
  long long ir_len = 0;
  bool simulate = false;
  std::uint64_t seed = 0;
  std::size_t len = 256;
};

inline int cmd_quant(const QuantArgs& a, std::ostream& out) {
  if (a.bits < 2) throw UsageError("--bits must be at least 2");
  if (a.ir_len < 1) throw UsageError("--ir-len must be at least 1");
  const std::int64_t acc = quant::ideal_accumulator_bits(a.bits, a.ir_len);
  const std::int64_t removed = quant::ideal_bits_removed(a.bits, a.ir_len);
  const quant::MacRequantCount mac = quant::mac_requant_count(a.bits, a.ir_len);
  out << "word length N: " << a.bits << " bits, IR length Nh: " << a.ir_len
      << " samples\n"
      << "ideal accumulator width: " << acc << " bits\n"
      << "ideal: 1 requantization per output sample, removes " << removed
      << " bits\n"
      << "mac: " << mac.count << " requantizations per output sample x "
      << mac.bits_each << " bits\n";
  if (!a.simulate) return kExitOk;

  if (a.bits > 32) throw UsageError("--simulate supports --bits up to 32");
  if (a.len < 1) throw UsageError("--len must be at least 1");
  quant::FixedPointFormat fmt;
  fmt.word_bits = a.bits;
  const Signal e = bench::gen_white_noise(a.len, kDefaultSampleRate, a.seed);
  const Signal h = bench::gen_white_noise(static_cast<std::size_t>(a.ir_len),
                                          kDefaultSampleRate, a.seed + 1);
  const auto ideal = quant::simulate_fixed_point_conv(e, h, fmt, quant::Scheme::kIdeal);
  const auto macr = quant::simulate_fixed_point_conv(e, h, fmt, quant::Scheme::kMac);
  out << std::setprecision(6) << "simulation (seed " << a.seed << ", input " << a.len
      << " samples, ulp " << fmt.ulp() << ")\n";
  for (const auto* r : {&ideal, &macr}) {
    out << "  " << std::left << std::setw(6) << quant::to_string(r->scheme)
        << std::right << "rms " << r->rms_error << " (" << r->rms_error / r->ulp
        << " ulp), max " << r->max_error << " (" << r->max_error / r->ulp
        << " ulp), roundings " << r->total_operations << "\n";
  }
  out << "rms(ideal) <= rms(mac): "
      << (ideal.rms_error <= macr.rms_error ? "yes" : "no") << "\n";
  return kExitOk;
}

}  // namespace detail

/// Entry point shared by the executable and the tests. args excludes argv[0].
inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Zero-latency time-domain convolution toolkit", "taches"};
  app.require_subcommand(1);

  detail::ConvolveArgs conv;
  auto* c = app.add_subcommand("convolve", "Convolve a WAV file with an impulse response");
  c->add_option("input", conv.input, "Input WAV file")->required();
  c->add_option("ir", conv.ir, "Impulse response WAV file")->required();
  c->add_option("output", conv.output, "Output WAV file")->required();
  c->add_option("--nb", conv.nb, "Block size in samples")->capture_default_str();
  c->add_flag("--no-tail", conv.no_tail, "Write the body only, dropping the N_h-1 tail");
  c->add_option("--swap-ir", conv.swaps,
                "Switch to the impulse response in PATH from input sample SAMPLE on")
      ->type_name("PATH@SAMPLE");
  c->add_option("--normalize", conv.normalize, "Rescale the output peak to this value");
  c->add_option("--zero-skip", conv.zero_skip,
                "Skip input samples with |x| <= EPS")->capture_default_str();
  c->add_option("--encoding", conv.encoding, "pcm16, pcm24 or float32")
      ->capture_default_str();
  c->add_flag("--resample-reject", "Reject sample-rate mismatches (always on)");

  detail::BenchArgs bench_args;
  auto* b = app.add_subcommand("bench", "Time the convolution over IR lengths or block sizes");
  b->add_option("--ir-sweep", bench_args.ir_sweep, "IR lengths start:stop:step in ms");
  b->add_option("--nb-sweep", bench_args.nb_sweep, "Comma-separated block sizes")
      ->delimiter(',');
  b->add_option("--input", bench_args.input, "WAV path or noise:<seconds>")
      ->capture_default_str();
  b->add_option("--sample-rate", bench_args.sample_rate, "Sample rate for noise input")
      ->capture_default_str();
  b->add_option("--seed", bench_args.seed, "RNG seed")->capture_default_str();
  b->add_option("--reps", bench_args.reps, "Repetitions per cell")->capture_default_str();
  b->add_option("--nb", bench_args.nb, "Block size for the IR sweep")->capture_default_str();
  b->add_option("--ir-ms", bench_args.nb_ir_ms, "IR length in ms for the nb sweep")
      ->capture_default_str();
  b->add_option("--csv", bench_args.csv, "Write per-measurement CSV here");
  b->add_option("--gnuplot", bench_args.gnuplot, "Write a gnuplot data file here");
  b->add_flag("--parallel", bench_args.parallel, "Run sweep cells on separate threads");

  detail::QuantArgs quant_args;
  auto* q = app.add_subcommand("quant", "Requantization counts and fixed-point error");
  q->add_option("--bits", quant_args.bits, "Word length N in bits")->required();
  q->add_option("--ir-len", quant_args.ir_len, "Impulse response length Nh")->required();
  q->add_flag("--simulate", quant_args.simulate, "Run a fixed-point simulation");
  q->add_option("--seed", quant_args.seed, "RNG seed")->capture_default_str();
  q->add_option("--len", quant_args.len, "Input length for --simulate")
      ->capture_default_str();

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c->parsed()) return detail::cmd_convolve(conv, out, err);
    if (b->parsed()) return detail::cmd_bench(bench_args, out);
    return detail::cmd_quant(quant_args, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace taches::cli
