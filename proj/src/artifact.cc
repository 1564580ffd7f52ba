/*
 * Copyright 2026 The djack Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "djack/artifact.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "djack/error.h"

namespace djack {
namespace {

constexpr const char* kMagic = "djack-ensemble";

std::string hex(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

void write_vector(std::ostream& out, const std::string& key, const Vector& v) {
  out << key << ' ' << v.size();
  for (Index i = 0; i < v.size(); ++i) out << ' ' << hex(v(i));
  out << '\n';
}

class Reader {
 public:
  Reader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

  // Next line, which must start with `key`; returns the rest as a stream.
  std::istringstream line(const std::string& key) {
    std::string text;
    ++line_no_;
    if (!std::getline(in_, text)) fail("missing '" + key + "'");
    std::istringstream fields(text);
    std::string found;
    fields >> found;
    if (found != key) fail("expected '" + key + "', found '" + found + "'");
    return fields;
  }

  std::string word(const std::string& key) {
    auto fields = line(key);
    std::string value;
    if (!(fields >> value)) fail("empty '" + key + "'");
    return value;
  }

  double number(std::istream& fields, const std::string& key) {
    std::string token;
    if (!(fields >> token)) fail("too few values for '" + key + "'");
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) fail("bad number '" + token + "'");
    return v;
  }

  Index count(std::istream& fields, const std::string& key) {
    long long n = -1;
    if (!(fields >> n) || n < 0) fail("bad count for '" + key + "'");
    return static_cast<Index>(n);
  }

  Vector vector(const std::string& key, Index expected = -1) {
    auto fields = line(key);
    const Index n = count(fields, key);
    if (expected >= 0 && n != expected) fail("wrong length for '" + key + "'");
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = number(fields, key);
    std::string extra;
    if (fields >> extra) fail("trailing values for '" + key + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw IoError(path_ + ":" + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& in_;
  std::string path_;
  int line_no_ = 0;
};

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep)) parts.push_back(part);
  return parts;
}

}  // namespace

std::uint64_t spec_hash(const ModelSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : spec.canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ModelSpec parse_canonical_spec(const std::string& text) {
  ModelSpec spec;
  spec.hidden_layers.clear();
  bool seen[4] = {false, false, false, false};
  for (const std::string& field : split_on(text, ';')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw UsageError("bad spec field '" + field + "'");
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    try {
      if (key == "d") {
        spec.input_dim = std::stoi(value);
        seen[0] = true;
      } else if (key == "hidden") {
        if (!value.empty()) {
          for (const auto& w : split_on(value, ',')) {
            spec.hidden_layers.push_back(std::stoi(w));
          }
        }
        seen[1] = true;
      } else if (key == "act") {
        spec.activation = parse_activation(value);
        seen[2] = true;
      } else if (key == "l2") {
        spec.l2_penalty = std::strtod(value.c_str(), nullptr);
        seen[3] = true;
      } else {
        throw UsageError("unknown spec field '" + key + "'");
      }
    } catch (const std::logic_error&) {
      throw UsageError("bad spec field '" + field + "'");
    }
  }
  for (const bool s : seen) {
    if (!s) throw UsageError("incomplete spec '" + text + "'");
  }
  spec.validate();
  return spec;
}

void save_ensemble(const LooEnsemble& e, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char hash[20];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(spec_hash(e.spec)));
  out << kMagic << ' ' << kArtifactVersion << '\n';
  out << "spec " << e.spec.canonical() << '\n';
  out << "spec_hash " << hash << '\n';
  out << "order " << e.order << '\n';
  out << "mode " << to_string(e.mode) << '\n';
  out << "signs " << to_string(e.signs) << '\n';
  out << "inverse " << to_string(e.inverse_mode) << '\n';
  out << "damping " << hex(e.damping) << '\n';
  out << "clamped " << e.clamped_eigenvalues << '\n';
  out << "degenerate " << (e.degenerate ? 1 : 0) << '\n';
  out << "scaling " << (e.scaling ? 1 : 0) << '\n';
  if (e.scaling) {
    write_vector(out, "feature_mean", e.scaling->feature_mean);
    write_vector(out, "feature_scale", e.scaling->feature_scale);
    out << "target " << hex(e.scaling->target_mean) << ' '
        << hex(e.scaling->target_scale) << '\n';
  }
  write_vector(out, "base", e.base);
  out << "count " << e.size() << '\n';
  for (const auto& params : e.loo_params) write_vector(out, "loo", params);
  write_vector(out, "residuals",
               Eigen::Map<const Vector>(e.residuals.data(), e.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

LooEnsemble load_ensemble(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Reader r(in, path.string());
  LooEnsemble e;
  {
    auto header = r.line(kMagic);
    int version = 0;
    if (!(header >> version) || version != kArtifactVersion) {
      r.fail("unsupported artifact version");
    }
  }
  try {
    e.spec = parse_canonical_spec(r.word("spec"));
  } catch (const UsageError& err) {
    r.fail(err.what());
  }
  const std::string hash = r.word("spec_hash");
  char expected[20];
  std::snprintf(expected, sizeof(expected), "%016llx",
                static_cast<unsigned long long>(spec_hash(e.spec)));
  if (hash != expected) r.fail("spec hash mismatch");
  try {
    e.order = std::stoi(r.word("order"));
    e.mode = parse_second_order_mode(r.word("mode"));
    e.signs = parse_sign_convention(r.word("signs"));
    e.inverse_mode = parse_inverse_hvp_mode(r.word("inverse"));
  } catch (const std::logic_error& err) {
    r.fail(err.what());
  }
  {
    auto fields = r.line("damping");
    e.damping = r.number(fields, "damping");
  }
  {
    auto fields = r.line("clamped");
    e.clamped_eigenvalues = r.count(fields, "clamped");
  }
  e.degenerate = r.word("degenerate") == "1";
  if (r.word("scaling") == "1") {
    Standardization s;
    s.feature_mean = r.vector("feature_mean", e.spec.input_dim);
    s.feature_scale = r.vector("feature_scale", e.spec.input_dim);
    auto fields = r.line("target");
    s.target_mean = r.number(fields, "target");
    s.target_scale = r.number(fields, "target");
    e.scaling = std::move(s);
  }
  const Index p = Network(e.spec).param_count();
  e.base = r.vector("base", p);
  Index n = 0;
  {
    auto fields = r.line("count");
    n = r.count(fields, "count");
  }
  e.loo_params.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) e.loo_params.push_back(r.vector("loo", p));
  const Vector residuals = r.vector("residuals", n);
  e.residuals.assign(residuals.data(), residuals.data() + n);
  return e;
}

}  // namespace djack
