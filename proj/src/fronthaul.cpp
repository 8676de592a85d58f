#include "asyncact/fronthaul.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <queue>

namespace asyncact {

QuantizerSpec QuantizerSpec::uniform(int bits, double lo, double hi) {
  QuantizerSpec q;
  q.bits = bits;
  q.lo = lo;
  q.hi = hi;
  q.levels = std::uint64_t{1} << bits;
  q.validate();
  return q;
}

QuantizerSpec QuantizerSpec::symmetric(int bits, double scale) {
  QuantizerSpec q;
  q.bits = bits;
  q.lo = -scale;
  q.hi = scale;
  q.levels = (std::uint64_t{1} << bits) - 1;
  q.validate();
  return q;
}

void QuantizerSpec::validate() const {
  if (bits < 1 || bits > 52) throw ConfigError("bits: must lie in [1, 52]");
  if (!(lo < hi)) throw ConfigError("quantizer range: lo must be below hi");
  if (levels < 2 && bits > 1) throw ConfigError("levels: need at least two");
  if (levels > (std::uint64_t{1} << bits)) throw ConfigError("levels: exceed 2^bits");
}

double dequantize(std::uint64_t symbol, const QuantizerSpec& spec) {
  if (spec.levels < 2) return spec.lo;
  // interpolation form keeps lo, hi and the midpoint exact
  const double f = static_cast<double>(symbol) / static_cast<double>(spec.levels - 1);
  return spec.lo * (1.0 - f) + spec.hi * f;
}

namespace {

std::uint64_t quantize_scalar(double v, const QuantizerSpec& spec) {
  if (spec.levels < 2) return 0;
  const double c = std::clamp(v, spec.lo, spec.hi);
  const double j = std::nearbyint((c - spec.lo) / spec.step());
  return std::min<std::uint64_t>(static_cast<std::uint64_t>(std::max(j, 0.0)), spec.levels - 1);
}

}  // namespace

Quantized quantize(const RVec& v, const QuantizerSpec& spec) {
  Quantized out;
  out.symbols.resize(static_cast<std::size_t>(v.size()));
  out.recon.resize(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto j = quantize_scalar(v(i), spec);
    out.symbols[static_cast<std::size_t>(i)] = j;
    out.recon(i) = dequantize(j, spec);
  }
  return out;
}

QuantizedCovariance quantize_covariance(const CMat& R, int bits) {
  const Eigen::Index n = R.rows();
  QuantizedCovariance out;
  out.scale = R.cwiseAbs().maxCoeff();
  out.recon = CMat::Zero(n, n);
  out.symbols.reserve(static_cast<std::size_t>(n * n));
  if (out.scale == 0.0) {
    out.symbols.assign(static_cast<std::size_t>(n * n), 0);
    return out;
  }
  const QuantizerSpec diag = QuantizerSpec::uniform(bits, 0.0, out.scale);
  const QuantizerSpec off = QuantizerSpec::symmetric(bits, out.scale);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto j = quantize_scalar(R(i, i).real(), diag);
    out.symbols.push_back(j);
    out.recon(i, i) = dequantize(j, diag);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      const auto jr = quantize_scalar(R(i, k).real(), off);
      const auto ji = quantize_scalar(R(i, k).imag(), off);
      out.symbols.push_back(jr);
      out.symbols.push_back(ji);
      const cd v(dequantize(jr, off), dequantize(ji, off));
      out.recon(i, k) = v;
      out.recon(k, i) = std::conj(v);
    }
  }
  return out;
}

QuantizedSignal quantize_signal(const CMat& Y, int bits) {
  QuantizedSignal out;
  out.scale = std::max(Y.real().cwiseAbs().maxCoeff(), Y.imag().cwiseAbs().maxCoeff());
  out.recon = CMat::Zero(Y.rows(), Y.cols());
  out.symbols.reserve(static_cast<std::size_t>(2 * Y.size()));
  if (out.scale == 0.0) {
    out.symbols.assign(static_cast<std::size_t>(2 * Y.size()), 0);
    return out;
  }
  const QuantizerSpec q = QuantizerSpec::symmetric(bits, out.scale);
  for (Eigen::Index j = 0; j < Y.cols(); ++j) {
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
      const auto jr = quantize_scalar(Y(i, j).real(), q);
      const auto ji = quantize_scalar(Y(i, j).imag(), q);
      out.symbols.push_back(jr);
      out.symbols.push_back(ji);
      out.recon(i, j) = cd(dequantize(jr, q), dequantize(ji, q));
    }
  }
  return out;
}

namespace {

// Code lengths of an optimal prefix code for the histogram (ascending symbol).
std::vector<int> huffman_lengths(const std::vector<std::size_t>& counts) {
  const std::size_t n = counts.size();
  if (n == 1) return {1};
  std::vector<int> parent(2 * n - 1, -1);
  using Node = std::pair<std::size_t, std::size_t>;  // (weight, node id)
  std::priority_queue<Node, std::vector<Node>, std::greater<>> heap;
  for (std::size_t i = 0; i < n; ++i) heap.emplace(counts[i], i);
  std::size_t next = n;
  while (heap.size() > 1) {
    const Node a = heap.top();
    heap.pop();
    const Node b = heap.top();
    heap.pop();
    parent[a.second] = static_cast<int>(next);
    parent[b.second] = static_cast<int>(next);
    heap.emplace(a.first + b.first, next++);
  }
  std::vector<int> lengths(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int depth = 0;
    for (int p = parent[i]; p >= 0; p = parent[static_cast<std::size_t>(p)]) ++depth;
    lengths[i] = depth;
  }
  return lengths;
}

struct CanonicalCode {
  std::vector<std::uint64_t> symbols;  // sorted by (length, symbol)
  std::vector<int> lengths;            // parallel to symbols
  std::vector<std::uint64_t> codes;    // parallel to symbols
};

CanonicalCode canonical(const std::vector<std::pair<std::uint64_t, int>>& code_lengths) {
  std::vector<std::pair<int, std::uint64_t>> order;
  order.reserve(code_lengths.size());
  for (const auto& [sym, len] : code_lengths) order.emplace_back(len, sym);
  std::sort(order.begin(), order.end());
  CanonicalCode cc;
  std::uint64_t code = 0;
  int prev = order.empty() ? 0 : order.front().first;
  for (const auto& [len, sym] : order) {
    if (len > 63) throw NumericalError("huffman code length exceeds 63 bits");
    code <<= (len - prev);
    prev = len;
    cc.symbols.push_back(sym);
    cc.lengths.push_back(len);
    cc.codes.push_back(code++);
  }
  return cc;
}

std::vector<std::pair<std::uint64_t, int>> build_lengths(std::span<const std::uint64_t> symbols) {
  std::map<std::uint64_t, std::size_t> hist;
  for (auto s : symbols) ++hist[s];
  std::vector<std::size_t> counts;
  counts.reserve(hist.size());
  for (const auto& [sym, c] : hist) counts.push_back(c);
  const auto lengths = huffman_lengths(counts);
  std::vector<std::pair<std::uint64_t, int>> out;
  out.reserve(hist.size());
  std::size_t i = 0;
  for (const auto& [sym, c] : hist) out.emplace_back(sym, lengths[i++]);
  return out;
}

}  // namespace

HuffmanStream huffman_encode(std::span<const std::uint64_t> symbols) {
  HuffmanStream st;
  st.symbol_count = symbols.size();
  if (symbols.empty()) return st;
  st.code_lengths = build_lengths(symbols);
  const CanonicalCode cc = canonical(st.code_lengths);
  std::map<std::uint64_t, std::size_t> pos;
  for (std::size_t i = 0; i < cc.symbols.size(); ++i) pos[cc.symbols[i]] = i;

  std::uint8_t cur = 0;
  int filled = 0;
  for (auto s : symbols) {
    const std::size_t i = pos.at(s);
    for (int b = cc.lengths[i] - 1; b >= 0; --b) {
      cur = static_cast<std::uint8_t>((cur << 1) | ((cc.codes[i] >> b) & 1U));
      ++st.bit_count;
      if (++filled == 8) {
        st.payload.push_back(cur);
        cur = 0;
        filled = 0;
      }
    }
  }
  if (filled > 0) st.payload.push_back(static_cast<std::uint8_t>(cur << (8 - filled)));
  return st;
}

std::vector<std::uint64_t> huffman_decode(const HuffmanStream& st) {
  std::vector<std::uint64_t> out;
  if (st.symbol_count == 0) return out;
  const CanonicalCode cc = canonical(st.code_lengths);
  const int max_len = cc.lengths.back();
  // first code and index of the first symbol of each length
  std::vector<std::uint64_t> first(static_cast<std::size_t>(max_len + 1), 0);
  std::vector<std::size_t> count(static_cast<std::size_t>(max_len + 1), 0);
  std::vector<std::size_t> offset(static_cast<std::size_t>(max_len + 1), 0);
  for (std::size_t i = cc.symbols.size(); i-- > 0;) {
    const auto len = static_cast<std::size_t>(cc.lengths[i]);
    first[len] = cc.codes[i];
    offset[len] = i;
    ++count[len];
  }

  out.reserve(st.symbol_count);
  std::size_t bit = 0;
  while (out.size() < st.symbol_count) {
    std::uint64_t code = 0;
    int len = 0;
    for (;;) {
      if (bit >= st.bit_count) throw NumericalError("huffman stream truncated");
      const unsigned v = (st.payload[bit / 8] >> (7 - bit % 8)) & 1U;
      ++bit;
      code = (code << 1) | v;
      ++len;
      if (len > max_len) throw NumericalError("invalid huffman code");
      const auto l = static_cast<std::size_t>(len);
      if (count[l] > 0 && code >= first[l] && code - first[l] < count[l]) {
        out.push_back(cc.symbols[offset[l] + (code - first[l])]);
        break;
      }
    }
  }
  return out;
}

std::size_t huffman_bits(std::span<const std::uint64_t> symbols) {
  if (symbols.empty()) return 0;
  const auto lengths = build_lengths(symbols);
  std::map<std::uint64_t, int> len_of(lengths.begin(), lengths.end());
  std::size_t bits = 0;
  for (auto s : symbols) bits += static_cast<std::size_t>(len_of[s]);
  return bits;
}

HuffmanRoundtrip huffman_roundtrip(std::span<const std::uint64_t> symbols) {
  const HuffmanStream st = huffman_encode(symbols);
  return {st.bit_count, huffman_decode(st)};
}

std::int64_t bits_alg1(std::int64_t M, std::int64_t Q1, std::int64_t L, std::int64_t T,
                       std::int64_t N) {
  const std::int64_t LT = L + T;
  if (LT <= 2 * N) return M * Q1 * LT * LT;
  return 2 * M * Q1 * LT * N;
}

std::int64_t bits_alg3(std::int64_t M, std::int64_t K, std::int64_t Q2, std::int64_t T,
                       std::int64_t I) {
  return (2 * I - 1) * M * K * Q2 * (T + 1);
}

std::string to_string(Direction d) {
  return d == Direction::ApToCpu ? "ap_to_cpu" : "cpu_to_ap";
}

void BitLedger::add(const MessageRecord& rec) {
  records_.push_back(rec);
  raw_total_ += rec.raw_bits;
  huffman_total_ += rec.huffman_bits;
}

void BitLedger::merge(const BitLedger& other) {
  for (const auto& r : other.records_) add(r);
}

void BitLedger::write_csv(std::ostream& os) const {
  os << "iteration,direction,raw_bits,huffman_bits\n";
  for (const auto& r : records_) {
    os << r.iteration << ',' << to_string(r.direction) << ',' << r.raw_bits << ','
       << r.huffman_bits << '\n';
  }
}

ReceivedData cpu_view(const ReceivedData& data, int bits, BitLedger* ledger) {
  ReceivedData out = data;
  const int LT = data.effective_len();
  const bool send_cov = LT <= 2 * data.antennas;
  for (int m = 0; m < data.num_aps; ++m) {
    std::vector<std::uint64_t> symbols;
    std::size_t zeros = 0;
    if (send_cov) {
      auto q = quantize_covariance(data.sample_cov[m], bits);
      for (Eigen::Index j = 0; j < LT; ++j) {
        zeros += q.recon(j, j).real() == 0.0;
        for (Eigen::Index i = 0; i < j; ++i) {
          zeros += (q.recon(i, j).real() == 0.0) + (q.recon(i, j).imag() == 0.0);
        }
      }
      out.sample_cov[m] = std::move(q.recon);
      symbols = std::move(q.symbols);
    } else {
      auto q = quantize_signal(data.Y[m], bits);
      zeros = static_cast<std::size_t>((q.recon.real().array() == 0.0).count() +
                                       (q.recon.imag().array() == 0.0).count());
      CMat R = q.recon * q.recon.adjoint() / static_cast<double>(data.antennas);
      out.sample_cov[m] = (R + R.adjoint()) * 0.5;
      out.Y[m] = std::move(q.recon);
      symbols = std::move(q.symbols);
    }
    if (ledger) {
      MessageRecord rec;
      rec.iteration = 0;
      rec.direction = Direction::ApToCpu;
      rec.ap = m;
      rec.payload_len = symbols.size();
      rec.raw_bits = static_cast<std::uint64_t>(bits) * symbols.size();
      rec.huffman_bits = huffman_bits(symbols);
      rec.zero_values = zeros;
      ledger->add(rec);
    }
  }
  return out;
}

}  // namespace asyncact
