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

#ifndef CEDR_REFERENCE_HPP_
#define CEDR_REFERENCE_HPP_

#include <span>

#include <cedr/algebra.hpp>
#include <cedr/pattern.hpp>

/**
 * Serial brute-force evaluators.
 *
 * Snapshot operators are evaluated one elementary interval at a time and the result is
 * coalesced per payload; pattern operators enumerate every candidate combination of input
 * events and test the defining condition directly. Slow, but small enough to read.
 */
namespace cedr::reference {

UnitemporalTable project(const UnitemporalTable& input, const algebra::PayloadMap& f);
UnitemporalTable select(const UnitemporalTable& input, const algebra::PayloadPredicate& f);
UnitemporalTable join(const UnitemporalTable& left, const UnitemporalTable& right, const algebra::JoinPredicate& theta);
UnitemporalTable setUnion(const UnitemporalTable& a, const UnitemporalTable& b);
UnitemporalTable difference(const UnitemporalTable& a, const UnitemporalTable& b);
UnitemporalTable groupbyAggregate(const UnitemporalTable& input,
                                  const std::vector<std::string>& keys,
                                  algebra::Aggregate agg,
                                  const std::string& target,
                                  std::string outputName = {});
UnitemporalTable alterLifetime(const UnitemporalTable& input, const algebra::LifetimeFunctions& fns);
UnitemporalTable window(const UnitemporalTable& input, Timestamp length);
UnitemporalTable hoppingWindow(const UnitemporalTable& input, Timestamp period);
UnitemporalTable inserts(const UnitemporalTable& input);
UnitemporalTable deletes(const UnitemporalTable& input);

PatternStream atleast(std::size_t n, std::span<const PatternStream> inputs, Timestamp scope, const pattern::CompositeFilter& filter = {});
PatternStream sequence(std::span<const PatternStream> inputs, Timestamp scope, const pattern::CompositeFilter& filter = {});
PatternStream all(std::span<const PatternStream> inputs, Timestamp scope, const pattern::CompositeFilter& filter = {});
PatternStream any(std::span<const PatternStream> inputs, const pattern::CompositeFilter& filter = {});
PatternStream atmost(std::size_t n, std::span<const PatternStream> inputs, Timestamp scope, const pattern::CompositeFilter& filter = {});
PatternStream unless(const PatternStream& first, const PatternStream& blockers, Timestamp scope, const pattern::BlockPredicate& block = {});
PatternStream notSequence(const PatternStream& blockers,
                          std::span<const PatternStream> inputs,
                          Timestamp scope,
                          const pattern::CompositeFilter& filter = {},
                          const pattern::BlockPredicate& block = {});
PatternStream cancelWhen(const PatternStream& first, const PatternStream& blockers, const pattern::BlockPredicate& block = {});

}// namespace cedr::reference

#endif// CEDR_REFERENCE_HPP_
