// Copyright 2026 The dplena-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dplena/oracle.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace dplena {

SoftmaxConfidence softmax_confidence(std::span<const float> logits) {
  SoftmaxConfidence out;
  if (logits.empty()) return out;
  float max = logits[0];
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > max) {
      max = logits[i];
      out.argmax = i;
    }
  }
  float sum = 0.0f;
  for (float z : logits) sum += static_cast<float>(std::exp(static_cast<double>(z - max)));
  out.max_prob = 1.0f / sum;
  return out;
}

float pairwise_sum(std::span<const float> values) {
  if (values.empty()) return 0.0f;
  if (values.size() == 1) return values[0];
  const std::size_t half = std::bit_ceil(values.size()) / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

StableMax stable_max(std::span<const Bf16> logits, std::uint32_t vlen) {
  StableMax out;
  float m = -std::numeric_limits<float>::infinity();
  float s = 0.0f;
  std::vector<float> e;
  for (std::size_t base = 0; base < logits.size(); base += vlen) {
    const std::size_t n = std::min<std::size_t>(vlen, logits.size() - base);
    auto chunk = logits.subspan(base, n);
    float cmax = chunk[0].to_float();
    std::size_t cidx = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (chunk[i].to_float() > cmax) {
        cmax = chunk[i].to_float();
        cidx = i;
      }
    }
    const float m_old = m;
    if (cmax > m) {
      m = cmax;
      out.argmax = base + cidx;
    }
    e.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const float shifted = round_bf16(chunk[i].to_float() - m);
      e[i] = round_bf16(static_cast<float>(std::exp(static_cast<double>(shifted))));
    }
    const float csum = pairwise_sum(e);
    const float rescale = static_cast<float>(std::exp(static_cast<double>(m_old - m)));
    s = s * rescale;
    s = s + csum;
  }
  out.max = m;
  out.sum_exp = s;
  out.confidence = round_bf16(1.0f / s);
  return out;
}

namespace {

std::vector<std::size_t> top_k(const std::vector<float>& conf, const std::vector<std::uint8_t>& eligible,
                               std::size_t begin, std::size_t len, std::size_t k, TieRule rule) {
  std::vector<std::size_t> order;
  for (std::size_t l = 0; l < len; ++l) {
    if (eligible[begin + l]) order.push_back(l);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const float ca = conf[begin + a], cb = conf[begin + b];
    if (ca != cb) return ca > cb;
    return rule == TieRule::LowerIndex ? a < b : a > b;
  });
  order.resize(std::min(k, order.size()));
  return order;
}

}  // namespace

OracleResult oracle_sample(const SamplingConfig& c, const Hbm& hbm, const OracleOptions& options) {
  c.validate();
  const std::size_t rows = c.rows();
  OracleResult result;
  result.tokens.assign(rows, c.mask_id);
  std::vector<std::uint8_t> eligible(rows, 1);
  std::vector<Bf16> row(c.vocab);
  std::vector<float> row_f(c.vocab);

  for (std::uint32_t t = 0; t < c.steps; ++t) {
    const std::uint32_t k = c.block_len / c.steps + (t < c.block_len % c.steps ? 1 : 0);
    OracleStep step;
    step.step = t;
    step.confidence.resize(rows);
    step.committed.assign(rows, 0);
    std::vector<std::int32_t> argmax(rows);
    for (std::uint32_t b = 0; b < c.batch; ++b) {
      for (std::uint32_t l = 0; l < c.block_len; ++l) {
        const std::size_t p = std::size_t{b} * c.block_len + l;
        const std::uint64_t first = ((std::uint64_t{t} * c.batch + b) * c.block_len + l) * c.vocab;
        hbm.decode_range(first, row);
        std::transform(row.begin(), row.end(), row_f.begin(), [](Bf16 v) { return v.to_float(); });
        const auto ref = softmax_confidence(row_f);
        const auto sm = stable_max(row, c.vlen);
        step.confidence[p] = sm.confidence;
        argmax[p] = static_cast<std::int32_t>(sm.argmax);
        if (ref.argmax != sm.argmax) ++step.argmax_mismatches;
        const double dev = std::abs(double{sm.confidence} - ref.max_prob) / ref.max_prob;
        step.max_method_deviation = std::max(step.max_method_deviation, dev);
      }
      const std::size_t begin = std::size_t{b} * c.block_len;
      for (std::size_t l : top_k(step.confidence, eligible, begin, c.block_len, k, options.tie_rule)) {
        step.committed[begin + l] = 1;
      }
    }
    for (std::size_t p = 0; p < rows; ++p) {
      if (step.committed[p]) {
        result.tokens[p] = argmax[p];
        eligible[p] = 0;
      }
    }
    step.tokens = result.tokens;
    result.steps.push_back(std::move(step));
  }
  return result;
}

namespace {

void append_float(std::string& out, float v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

}  // namespace

std::string format_trace(const SamplingConfig& c, const OracleResult& result) {
  std::string out;
  for (const auto& step : result.steps) {
    for (std::uint32_t b = 0; b < c.batch; ++b) {
      const std::size_t begin = std::size_t{b} * c.block_len;
      out += "step " + std::to_string(step.step) + " batch " + std::to_string(b) + " commit";
      char sep = ' ';
      for (std::uint32_t l = 0; l < c.block_len; ++l) {
        if (!step.committed[begin + l]) continue;
        out += sep;
        out += std::to_string(l) + ":" + std::to_string(step.tokens[begin + l]);
        sep = ',';
      }
      out += " conf";
      sep = ' ';
      for (std::uint32_t l = 0; l < c.block_len; ++l) {
        out += sep;
        append_float(out, step.confidence[begin + l]);
        sep = ',';
      }
      out += '\n';
    }
  }
  return out;
}

}  // namespace dplena
