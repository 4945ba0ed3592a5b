#include "palmseg/rng.hpp"

#include "palmseg/errors.hpp"

namespace palmseg {

uint64_t Rng::next_u64() {
  state_ += 0x9E3779B97F4A7C15ull;
  uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

int64_t Rng::next_below(int64_t n) {
  if (n <= 0) throw ArgumentError("rng: next_below needs a positive bound");
  return static_cast<int64_t>(next_u64() % static_cast<uint64_t>(n));
}

namespace {
uint64_t fnv1a_update(uint64_t h, const unsigned char* bytes, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001B3ull;
  }
  return h;
}
}  // namespace

uint64_t hash_combine(uint64_t seed, std::string_view text) {
  uint64_t h = 0xCBF29CE484222325ull ^ seed;
  return fnv1a_update(h, reinterpret_cast<const unsigned char*>(text.data()),
                      text.size());
}

uint64_t hash_combine(uint64_t seed, uint64_t value) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i)
    bytes[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
  uint64_t h = 0xCBF29CE484222325ull ^ seed;
  return fnv1a_update(h, bytes, 8);
}

}  // namespace palmseg
