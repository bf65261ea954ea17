#pragma once

// Slow reference computations used only by tests, kept independent of the
// library's own algorithms.

#include <cstddef>
#include <functional>
#include <vector>

#include "specpos/intmat.hpp"
#include "specpos/ring.hpp"

namespace oracles {

using specpos::IMat;
using specpos::Int;

// Search for a table isomorphism by backtracking on element images.
inline bool finite_rings_isomorphic(const specpos::RingHandle& a, const specpos::RingHandle& b) {
    if (a->n != b->n) return false;
    std::size_t n = a->n;
    std::vector<int> img(n, -1);
    std::vector<bool> used(n, false);
    img[a->zero] = b->zero;
    used[b->zero] = true;
    if (a->one != a->zero) {
        if (used[b->one]) return false;
        img[a->one] = b->one;
        used[b->one] = true;
    }
    auto consistent = [&]() {
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t y = 0; y < n; ++y) {
                if (img[x] < 0 || img[y] < 0) continue;
                int sa = img[a->add[x * n + y]];
                if (sa >= 0 && sa != b->add[img[x] * n + img[y]]) return false;
                int ma = img[a->mul[x * n + y]];
                if (ma >= 0 && ma != b->mul[img[x] * n + img[y]]) return false;
            }
        return true;
    };
    std::function<bool()> go = [&]() {
        std::size_t x = 0;
        while (x < n && img[x] >= 0) ++x;
        if (x == n) return consistent();
        for (std::size_t y = 0; y < n; ++y) {
            if (used[y]) continue;
            img[x] = static_cast<int>(y);
            used[y] = true;
            if (consistent() && go()) return true;
            img[x] = -1;
            used[y] = false;
        }
        return false;
    };
    return go();
}

inline Int det_rec(const IMat& a) {
    std::size_t n = a.size();
    if (n == 0) return 1;
    if (n == 1) return a[0][0];
    Int acc = 0;
    int sign = 1;
    for (std::size_t j = 0; j < n; ++j) {
        IMat minor;
        for (std::size_t i = 1; i < n; ++i) {
            std::vector<Int> row;
            for (std::size_t k = 0; k < n; ++k)
                if (k != j) row.push_back(a[i][k]);
            minor.push_back(std::move(row));
        }
        acc += sign * a[0][j] * det_rec(minor);
        sign = -sign;
    }
    return acc;
}

inline void subsets(std::size_t n, std::size_t k, std::size_t start,
                    std::vector<std::size_t>& cur,
                    std::vector<std::vector<std::size_t>>& out) {
    if (cur.size() == k) { out.push_back(cur); return; }
    for (std::size_t i = start; i < n; ++i) {
        cur.push_back(i);
        subsets(n, k, i + 1, cur, out);
        cur.pop_back();
    }
}

// d_k = gcd(k-minors) / gcd((k-1)-minors)
inline std::vector<Int> elementary_divisors_via_minors(const IMat& a) {
    std::size_t m = a.size(), n = m ? a[0].size() : 0;
    std::size_t bound = std::min(m, n);
    std::vector<Int> dets(bound + 1, 0);
    dets[0] = 1;
    for (std::size_t k = 1; k <= bound; ++k) {
        std::vector<std::vector<std::size_t>> rsets, csets;
        std::vector<std::size_t> cur;
        subsets(m, k, 0, cur, rsets);
        subsets(n, k, 0, cur, csets);
        Int g = 0;
        for (const auto& rs : rsets)
            for (const auto& cs : csets) {
                IMat sub(k, std::vector<Int>(k));
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t j = 0; j < k; ++j) sub[i][j] = a[rs[i]][cs[j]];
                g = specpos::int_gcd(g, det_rec(sub));
            }
        dets[k] = g;
    }
    std::vector<Int> out;
    for (std::size_t k = 1; k <= bound; ++k) {
        if (dets[k] == 0) out.push_back(0);
        else out.push_back(dets[k] / dets[k - 1]);
    }
    return out;
}

} // namespace oracles
