// langid/common.h

// Copyright 2026  The langid authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef LANGID_COMMON_H_
#define LANGID_COMMON_H_

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace langid {

/// Base class for every error raised by the library. The CLI maps these to
/// exit code 2; UsageError maps to exit code 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string &what) : Error(what) {}
};

namespace internal {
inline void Append(std::ostringstream &) {}
template <typename First, typename... Rest>
void Append(std::ostringstream &os, First &&first, Rest &&...rest) {
  os << std::forward<First>(first);
  Append(os, std::forward<Rest>(rest)...);
}
}  // namespace internal

template <typename... Args>
[[noreturn]] void Fail(Args &&...args) {
  std::ostringstream os;
  internal::Append(os, std::forward<Args>(args)...);
  throw Error(os.str());
}

template <typename... Args>
void Check(bool cond, Args &&...args) {
  if (!cond) Fail(std::forward<Args>(args)...);
}

/// Verbosity from LANGID_LOG (0 = warnings only, 1 = info, 2 = debug).
int LogLevel();

void LogWarning(const std::string &msg);
void LogInfo(const std::string &msg);
void LogDebug(const std::string &msg);

using Rng = std::mt19937_64;

/// splitmix64 finalizer; mixes a base seed with stream indices so that
/// per-epoch / per-utterance generators are independent of call order.
inline uint64_t MixSeed(uint64_t seed, uint64_t a, uint64_t b = 0) {
  uint64_t z = seed ^ (a * 0x9E3779B97F4A7C15ULL) ^ (b * 0xC2B2AE3D27D4EB4FULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Flat "key = value" text file. '#' starts a comment; blank lines ignored.
/// Keys are kept in sorted order so serialization is canonical.
class KeyValueFile {
 public:
  KeyValueFile() = default;
  static KeyValueFile Parse(const std::string &text);
  static KeyValueFile Read(const std::string &path);

  bool Has(const std::string &key) const { return values_.count(key) != 0; }
  const std::string &Get(const std::string &key) const;
  std::string GetOr(const std::string &key, const std::string &def) const;
  double GetDouble(const std::string &key, double def) const;
  int64_t GetInt(const std::string &key, int64_t def) const;
  bool GetBool(const std::string &key, bool def) const;

  void Set(const std::string &key, const std::string &value) {
    values_[key] = value;
  }
  const std::map<std::string, std::string> &values() const { return values_; }

  std::string ToString() const;
  void Write(const std::string &path) const;

 private:
  std::map<std::string, std::string> values_;
};

std::string ReadTextFile(const std::string &path);
void WriteTextFile(const std::string &path, const std::string &text);

/// Splits on a delimiter and trims whitespace around each piece.
std::vector<std::string> SplitTrim(const std::string &s, char delim);
std::string Trim(const std::string &s);

/// Runs fn(0..n-1) on up to `jobs` threads with a static contiguous
/// partition. The first exception (lowest index) is rethrown.
void ParallelFor(size_t n, int jobs, const std::function<void(size_t)> &fn);

/// 64-bit FNV-1a, used for config digests.
inline uint64_t Fnv1a64(const std::string &s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace langid

#endif  // LANGID_COMMON_H_
