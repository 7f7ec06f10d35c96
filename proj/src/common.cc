// langid/common.cc

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

#include "langid/common.h"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <thread>

namespace langid {

int LogLevel() {
  static const int level = [] {
    const char *env = std::getenv("LANGID_LOG");
    return env ? std::atoi(env) : 0;
  }();
  return level;
}

void LogWarning(const std::string &msg) {
  std::cerr << "WARNING: " << msg << '\n';
}

void LogInfo(const std::string &msg) {
  if (LogLevel() >= 1) std::cerr << "LOG: " << msg << '\n';
}

void LogDebug(const std::string &msg) {
  if (LogLevel() >= 2) std::cerr << "DEBUG: " << msg << '\n';
}

std::string Trim(const std::string &s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitTrim(const std::string &s, char delim) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, delim)) out.push_back(Trim(cur));
  if (!s.empty() && s.back() == delim) out.push_back("");
  return out;
}

std::string ReadTextFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail("cannot open ", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteTextFile(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail("cannot write ", path);
  out << text;
  if (!out) Fail("write failed: ", path);
}

KeyValueFile KeyValueFile::Parse(const std::string &text) {
  KeyValueFile kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      Fail("config line ", lineno, ": expected key = value, got '", line, "'");
    std::string key = Trim(line.substr(0, eq));
    if (key.empty()) Fail("config line ", lineno, ": empty key");
    kv.values_[key] = Trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValueFile KeyValueFile::Read(const std::string &path) {
  return Parse(ReadTextFile(path));
}

const std::string &KeyValueFile::Get(const std::string &key) const {
  auto it = values_.find(key);
  if (it == values_.end()) Fail("missing config key '", key, "'");
  return it->second;
}

std::string KeyValueFile::GetOr(const std::string &key,
                                const std::string &def) const {
  auto it = values_.find(key);
  return it == values_.end() ? def : it->second;
}

double KeyValueFile::GetDouble(const std::string &key, double def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  try {
    size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception &) {
    Fail("config key '", key, "': not a number: '", it->second, "'");
  }
}

int64_t KeyValueFile::GetInt(const std::string &key, int64_t def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  try {
    size_t pos = 0;
    long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception &) {
    Fail("config key '", key, "': not an integer: '", it->second, "'");
  }
}

bool KeyValueFile::GetBool(const std::string &key, bool def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  const std::string &v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  Fail("config key '", key, "': not a boolean: '", v, "'");
}

std::string KeyValueFile::ToString() const {
  std::ostringstream os;
  for (const auto &[k, v] : values_) os << k << " = " << v << '\n';
  return os.str();
}

void KeyValueFile::Write(const std::string &path) const {
  WriteTextFile(path, ToString());
}

void ParallelFor(size_t n, int jobs, const std::function<void(size_t)> &fn) {
  const size_t workers = std::min<size_t>(n, static_cast<size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      const size_t lo = n * w / workers, hi = n * (w + 1) / workers;
      try {
        for (size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto &t : threads) t.join();
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace langid
