/*
   Copyright 2026 The fluctx Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "fluctx/combinatorics.hpp"

#include <array>
#include <map>
#include <mutex>

namespace fluctx::combinatorics {

namespace {

void enumerate(int remaining, int slots, std::vector<int>& prefix,
               std::vector<Composition>& out) {
    if (slots == 0) {
        if (remaining == 0) out.push_back(Composition{prefix});
        return;
    }
    // Each of the remaining slots - 1 parts needs at least 1.
    for (int first = 1; first <= remaining - (slots - 1); ++first) {
        prefix.push_back(first);
        enumerate(remaining - first, slots - 1, prefix, out);
        prefix.pop_back();
    }
}

std::vector<Composition> build(int m, int i) {
    std::vector<Composition> out;
    if (m <= 0 || i <= 0 || i > m) return out;
    std::vector<int> prefix;
    prefix.reserve(static_cast<std::size_t>(i));
    enumerate(m, i, prefix, out);
    return out;
}

struct Cache {
    std::once_flag once;
    std::array<std::array<std::vector<Composition>, kMaxOrder + 1>, kMaxOrder + 1> table;
};

Cache& cache() {
    static Cache c;
    std::call_once(c.once, [] {
        for (int m = 1; m <= kMaxOrder; ++m)
            for (int i = 1; i <= m; ++i) c.table[m][i] = build(m, i);
    });
    return c;
}

}  // namespace

const std::vector<Composition>& compositions(int m, int i) {
    static const std::vector<Composition> empty;
    if (m <= 0 || i <= 0 || i > m) return empty;
    if (m <= kMaxOrder) return cache().table[m][i];
    // Beyond the cached range; keep one copy per (m, i) alive for the caller.
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::vector<Composition>> extra;
    std::lock_guard lock(mu);
    auto it = extra.find({m, i});
    if (it == extra.end()) it = extra.emplace(std::pair{m, i}, build(m, i)).first;
    return it->second;
}

double s_value(int m, int i, std::span<const double> xbar) {
    double sum = 0.0;
    for (const Composition& c : compositions(m, i)) {
        double prod = 1.0;
        for (int j : c.parts) prod *= xbar[static_cast<std::size_t>(j - 1)];
        sum += prod;
    }
    return sum;
}

std::vector<WeightedComposition> taylor_weights(int m, int i) {
    std::vector<WeightedComposition> out;
    const Rational w = Rational(1) / factorial(i);
    for (const Composition& c : compositions(m, i)) out.push_back({c, w});
    return out;
}

}  // namespace fluctx::combinatorics
