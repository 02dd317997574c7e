#include "ews/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ews/errors.hpp"
#include "ews/fmt.hpp"
#include "ews/version.hpp"

namespace ews::manifest {

namespace {

// FIPS 180-4 SHA-256, block-at-a-time.
constexpr std::uint32_t kInit[8] = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                                    0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};

constexpr std::uint32_t kRound[64] = {
    0x428a2f98u, 0x71374491u, 0xb5c0fbcfu, 0xe9b5dba5u, 0x3956c25bu, 0x59f111f1u, 0x923f82a4u,
    0xab1c5ed5u, 0xd807aa98u, 0x12835b01u, 0x243185beu, 0x550c7dc3u, 0x72be5d74u, 0x80deb1feu,
    0x9bdc06a7u, 0xc19bf174u, 0xe49b69c1u, 0xefbe4786u, 0x0fc19dc6u, 0x240ca1ccu, 0x2de92c6fu,
    0x4a7484aau, 0x5cb0a9dcu, 0x76f988dau, 0x983e5152u, 0xa831c66du, 0xb00327c8u, 0xbf597fc7u,
    0xc6e00bf3u, 0xd5a79147u, 0x06ca6351u, 0x14292967u, 0x27b70a85u, 0x2e1b2138u, 0x4d2c6dfcu,
    0x53380d13u, 0x650a7354u, 0x766a0abbu, 0x81c2c92eu, 0x92722c85u, 0xa2bfe8a1u, 0xa81a664bu,
    0xc24b8b70u, 0xc76c51a3u, 0xd192e819u, 0xd6990624u, 0xf40e3585u, 0x106aa070u, 0x19a4c116u,
    0x1e376c08u, 0x2748774cu, 0x34b0bcb5u, 0x391c0cb3u, 0x4ed8aa4au, 0x5b9cca4fu, 0x682e6ff3u,
    0x748f82eeu, 0x78a5636fu, 0x84c87814u, 0x8cc70208u, 0x90befffau, 0xa4506cebu, 0xbef9a3f7u,
    0xc67178f2u};

inline std::uint32_t rotr(std::uint32_t x, int n) {
  return (x >> n) | (x << (32 - n));
}

void compress(std::uint32_t h[8], const unsigned char block[64]) {
  std::uint32_t w[64];
  for (int i = 0; i < 16; ++i) {
    w[i] = (static_cast<std::uint32_t>(block[4 * i]) << 24) |
           (static_cast<std::uint32_t>(block[4 * i + 1]) << 16) |
           (static_cast<std::uint32_t>(block[4 * i + 2]) << 8) |
           static_cast<std::uint32_t>(block[4 * i + 3]);
  }
  for (int i = 16; i < 64; ++i) {
    const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
    const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
    w[i] = w[i - 16] + s0 + w[i - 7] + s1;
  }
  std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3];
  std::uint32_t e = h[4], f = h[5], g = h[6], hh = h[7];
  for (int i = 0; i < 64; ++i) {
    const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
    const std::uint32_t ch = (e & f) ^ (~e & g);
    const std::uint32_t t1 = hh + s1 + ch + kRound[i] + w[i];
    const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
    const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
    const std::uint32_t t2 = s0 + maj;
    hh = g;
    g = f;
    f = e;
    e = d + t1;
    d = c;
    c = b;
    b = a;
    a = t1 + t2;
  }
  h[0] += a;
  h[1] += b;
  h[2] += c;
  h[3] += d;
  h[4] += e;
  h[5] += f;
  h[6] += g;
  h[7] += hh;
}

}  // namespace

std::string sha256_hex(const void* data, std::size_t len) {
  std::uint32_t h[8];
  for (int i = 0; i < 8; ++i) h[i] = kInit[i];

  const auto* p = static_cast<const unsigned char*>(data);
  std::size_t remaining = len;
  while (remaining >= 64) {
    compress(h, p);
    p += 64;
    remaining -= 64;
  }

  unsigned char tail[128] = {0};
  for (std::size_t i = 0; i < remaining; ++i) tail[i] = p[i];
  tail[remaining] = 0x80;
  const std::size_t tail_len = (remaining < 56) ? 64 : 128;
  const std::uint64_t bits = static_cast<std::uint64_t>(len) * 8;
  for (int i = 0; i < 8; ++i) {
    tail[tail_len - 1 - static_cast<std::size_t>(i)] =
        static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  }
  compress(h, tail);
  if (tail_len == 128) compress(h, tail + 64);

  std::string out(64, '0');
  static const char* hex = "0123456789abcdef";
  for (int i = 0; i < 8; ++i) {
    for (int b = 0; b < 4; ++b) {
      const unsigned byte = (h[i] >> (8 * (3 - b))) & 0xffu;
      out[static_cast<std::size_t>(8 * i + 2 * b)] = hex[byte >> 4];
      out[static_cast<std::size_t>(8 * i + 2 * b + 1)] = hex[byte & 0xf];
    }
  }
  return out;
}

std::string sha256_hex(const std::string& s) {
  return sha256_hex(s.data(), s.size());
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", static_cast<unsigned>(c));
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  return out;
}

std::string run_manifest_json(const std::string& command, const std::string& config_json,
                              const std::vector<std::uint64_t>& seeds, double wall_clock_seconds,
                              const std::vector<OutputFile>& outputs) {
  std::string out = "{\"command\":\"" + json_escape(command) + "\",\"tool_version\":\"" +
                    std::string(kToolVersion) + "\",\"config\":" +
                    (config_json.empty() ? std::string("null") : config_json) + ",\"seeds\":[";
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(seeds[i]);
  }
  out += "],\"wall_clock_seconds\":" + fmt17(wall_clock_seconds) + ",\"outputs\":[";
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (i) out += ',';
    out += "{\"path\":\"" + json_escape(outputs[i].path) + "\",\"sha256\":\"" +
           outputs[i].sha256 + "\"}";
  }
  out += "]}";
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  require(!in.bad(), "failed reading " + path);
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), "cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  require(out.good(), "failed writing " + path);
}

}  // namespace ews::manifest
