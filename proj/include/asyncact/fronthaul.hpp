#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "asyncact/model.hpp"
#include "asyncact/types.hpp"

namespace asyncact {

/// Uniform midtread scalar quantizer: level j maps to lo + j * step, with
/// `levels` levels spanning [lo, hi] so both endpoints are exact.
struct QuantizerSpec {
  int bits = 4;
  double lo = 0.0;
  double hi = 1.0;
  std::uint64_t levels = 16;

  /// 2^bits levels on [lo, hi].
  static QuantizerSpec uniform(int bits, double lo = 0.0, double hi = 1.0);
  /// 2^bits - 1 levels on [-scale, scale]; zero is a level.
  static QuantizerSpec symmetric(int bits, double scale);

  double step() const { return (hi - lo) / static_cast<double>(levels - 1); }
  void validate() const;
};

struct Quantized {
  std::vector<std::uint64_t> symbols;
  RVec recon;
};

Quantized quantize(const RVec& v, const QuantizerSpec& spec);
double dequantize(std::uint64_t symbol, const QuantizerSpec& spec);

/// Quantized Hermitian matrix: diagonal on [0, s], upper-triangle real and
/// imaginary parts on the symmetric range [-s, s], s = max-abs entry.
struct QuantizedCovariance {
  std::vector<std::uint64_t> symbols;  // (L+T)^2 entries
  CMat recon;
  double scale = 0.0;  // side information, not counted against the budget
};

QuantizedCovariance quantize_covariance(const CMat& R, int bits);

/// Real and imaginary parts of Y on [-s, s]; recon is Q(Y) (not Q(Y)Q(Y)^H/N).
struct QuantizedSignal {
  std::vector<std::uint64_t> symbols;  // 2 (L+T) N entries
  CMat recon;
  double scale = 0.0;
};

QuantizedSignal quantize_signal(const CMat& Y, int bits);

/// Canonical Huffman code. Lengths are listed in symbol order; codes are
/// assigned by (length, symbol).
struct HuffmanStream {
  std::vector<std::pair<std::uint64_t, int>> code_lengths;  // (symbol, length), ascending symbol
  std::vector<std::uint8_t> payload;                        // MSB-first
  std::size_t bit_count = 0;                                // payload bits only
  std::size_t symbol_count = 0;
};

HuffmanStream huffman_encode(std::span<const std::uint64_t> symbols);
std::vector<std::uint64_t> huffman_decode(const HuffmanStream& stream);

/// Payload bits of the canonical code for `symbols` (codebook excluded).
std::size_t huffman_bits(std::span<const std::uint64_t> symbols);

struct HuffmanRoundtrip {
  std::size_t bit_count = 0;
  std::vector<std::uint64_t> decoded;
};

HuffmanRoundtrip huffman_roundtrip(std::span<const std::uint64_t> symbols);

/// Fronthaul bits of the centralized detector: covariance upload when
/// L+T <= 2N, raw signal upload otherwise.
std::int64_t bits_alg1(std::int64_t M, std::int64_t Q1, std::int64_t L, std::int64_t T,
                       std::int64_t N);

/// Fronthaul bits of the accelerated distributed detector after I iterations.
std::int64_t bits_alg3(std::int64_t M, std::int64_t K, std::int64_t Q2, std::int64_t T,
                       std::int64_t I);

enum class Direction { ApToCpu, CpuToAp };

std::string to_string(Direction d);

struct MessageRecord {
  int iteration = 0;
  Direction direction = Direction::ApToCpu;
  int ap = 0;
  std::size_t payload_len = 0;
  std::uint64_t raw_bits = 0;
  std::uint64_t huffman_bits = 0;
  std::size_t zero_values = 0;  // payload entries that reconstruct to exactly 0
};

class BitLedger {
 public:
  void add(const MessageRecord& rec);
  void merge(const BitLedger& other);

  const std::vector<MessageRecord>& records() const { return records_; }
  std::uint64_t raw_total() const { return raw_total_; }
  std::uint64_t huffman_total() const { return huffman_total_; }
  bool empty() const { return records_.empty(); }

  /// iteration,direction,raw_bits,huffman_bits
  void write_csv(std::ostream& os) const;

 private:
  std::vector<MessageRecord> records_;
  std::uint64_t raw_total_ = 0;
  std::uint64_t huffman_total_ = 0;
};

/// Full-precision (double) payload size used when a link is not quantized.
inline constexpr std::uint64_t kUnquantizedBitsPerScalar = 64;

/// What the CPU of the centralized detector sees after each AP uploads its
/// data with `bits` per real scalar: the quantized covariance when
/// L+T <= 2N, otherwise the covariance of the quantized signal. Appends one
/// uplink record per AP to `ledger` when given.
ReceivedData cpu_view(const ReceivedData& data, int bits, BitLedger* ledger = nullptr);

}  // namespace asyncact
