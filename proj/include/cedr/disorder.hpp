/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#ifndef CEDR_DISORDER_HPP_
#define CEDR_DISORDER_HPP_

#include <cstdint>
#include <vector>

#include <cedr/jsonl.hpp>

namespace cedr::disorder {

struct Options {
    std::uint64_t seed = 0;
    /// Maximum displacement of a row, in positions.
    std::size_t skew = 0;
    /// Per insertion row: probability of re-encoding it as a wrong insert, its removal and the corrected row.
    double retractProb = 0.0;
    /// Interleave the tightest honest occurrence-time guarantees.
    bool guarantees = false;
};

/**
 * @brief Re-encodes a stream with bounded arrival disorder and optimistic retractions.
 *
 * Rows of one lineage keep their relative order. C_s is renumbered 1..n in the new
 * order and C_e closed at the next row of the lineage. The result is checked to be
 * logically equivalent to infinity to the input; with skew 0, probability 0 and no
 * guarantees the input is returned unchanged.
 *
 * Throws Error(InvalidArgument) for a probability outside [0, 1].
 */
std::vector<jsonl::StreamItem> apply(const std::vector<TritemporalEvent>& rows, const Options& options);

/// Rows of a stream file in file order.
std::vector<TritemporalEvent> rowsOf(const std::vector<jsonl::StreamItem>& items);

/// Guarantee after each row: one less than the smallest Sync still to come.
std::vector<jsonl::StreamItem> withGuarantees(const std::vector<TritemporalEvent>& rows);

}// namespace cedr::disorder

#endif// CEDR_DISORDER_HPP_
