#include "ftsvd/ingest.hpp"

#include <cmath>
#include <string>

#include "ftsvd/error.hpp"

namespace ftsvd {

Tensor3 log_composition(const Tensor3& counts, double pseudocount) {
    if (!(pseudocount > 0.0)) throw ArgumentError("pseudocount must be positive");
    for (double c : counts.data()) {
        if (!std::isfinite(c) || c < 0.0) throw DataError("counts must be non-negative, got " + std::to_string(c));
        if (c != std::floor(c)) throw DataError("counts must be integers, got " + std::to_string(c));
    }
    Tensor3 out(counts.p1(), counts.p2(), counts.n());
    for (std::size_t k = 0; k < counts.n(); ++k) {
        for (std::size_t i = 0; i < counts.p1(); ++i) {
            double total = 0.0;
            for (std::size_t j = 0; j < counts.p2(); ++j) total += counts(i, j, k) + pseudocount;
            const double log_total = std::log(total);
            for (std::size_t j = 0; j < counts.p2(); ++j) out(i, j, k) = std::log(counts(i, j, k) + pseudocount) - log_total;
        }
    }
    return out;
}

}  // namespace ftsvd
