#include "relopt/rng.hpp"

#include "relopt/math.hpp"

namespace relopt {

uint64_t mix64(uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t master, std::string_view label, uint64_t a,
                     uint64_t b, uint64_t c) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the label bytes
  for (unsigned char ch : label) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  h = mix64(h ^ master);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  h = mix64(h ^ c);
  return h;
}

double RngStream::normal() { return normal_quantile(uniform01()); }

}  // namespace relopt
