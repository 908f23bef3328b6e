// Copyright (c) 2026 The usbl_homing Authors
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

#include "homing/stream.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace homing {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_number(const std::string& tok, std::size_t line) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw StreamParseError(line, "invalid number '" + tok + "'");
  }
  if (!std::isfinite(v)) throw StreamParseError(line, "non-finite value '" + tok + "'");
  return v;
}

}  // namespace

StreamParseError::StreamParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

double record_time(const MeasurementRecord& r) {
  return std::visit([](const auto& x) { return x.timestamp; }, r);
}

void sort_stream(MeasurementStream& stream) {
  std::stable_sort(stream.begin(), stream.end(), [](const MeasurementRecord& a, const MeasurementRecord& b) {
    const double ta = record_time(a);
    const double tb = record_time(b);
    if (ta != tb) return ta < tb;
    return a.index() < b.index();
  });
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_stream(std::ostream& os, const MeasurementStream& stream) {
  const auto f = format_double;
  for (const auto& rec : stream) {
    if (const auto* s = std::get_if<ImuSample>(&rec)) {
      os << "IMU " << f(s->timestamp) << ' ' << f(s->accel.x()) << ' ' << f(s->accel.y()) << ' '
         << f(s->accel.z()) << ' ' << f(s->gyro.x()) << ' ' << f(s->gyro.y()) << ' ' << f(s->gyro.z());
    } else if (const auto* d = std::get_if<DvlRecord>(&rec)) {
      os << "DVL " << f(d->timestamp) << ' ' << f(d->velocity_body.x()) << ' '
         << f(d->velocity_body.y()) << ' ' << f(d->velocity_body.z());
    } else if (const auto* z = std::get_if<DepthRecord>(&rec)) {
      os << "DEPTH " << f(z->timestamp) << ' ' << f(z->z);
    } else if (const auto* u = std::get_if<UsblFix>(&rec)) {
      os << "USBL " << f(u->timestamp) << ' ' << f(u->vector.x()) << ' ' << f(u->vector.y()) << ' '
         << f(u->vector.z()) << ' ' << f(u->measured_at);
    }
    os << '\n';
  }
}

MeasurementStream read_stream(std::istream& is) {
  MeasurementStream out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    const auto tok = split(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    const auto num = [&](std::size_t i) { return parse_number(tok[i], n); };
    const auto arity = [&](std::size_t k) {
      if (tok.size() != k + 1) {
        throw StreamParseError(n, tok[0] + " record expects " + std::to_string(k) + " fields, got " +
                                      std::to_string(tok.size() - 1));
      }
    };
    if (tok[0] == "IMU") {
      arity(7);
      out.emplace_back(ImuSample{num(1), Vec3(num(2), num(3), num(4)), Vec3(num(5), num(6), num(7))});
    } else if (tok[0] == "DVL") {
      arity(4);
      out.emplace_back(DvlRecord{num(1), Vec3(num(2), num(3), num(4))});
    } else if (tok[0] == "DEPTH") {
      arity(2);
      out.emplace_back(DepthRecord{num(1), num(2)});
    } else if (tok[0] == "USBL") {
      arity(5);
      out.emplace_back(UsblFix{num(1), num(5), Vec3(num(2), num(3), num(4))});
    } else {
      throw StreamParseError(n, "unknown record tag '" + tok[0] + "'");
    }
  }
  if (is.bad()) throw std::runtime_error("read_stream: I/O error");
  return out;
}

void save_stream(const std::string& path, const MeasurementStream& stream) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_stream(os, stream);
}

MeasurementStream load_stream(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_stream(is);
}

}  // namespace homing
