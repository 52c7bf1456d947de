#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace editforge {

inline constexpr double kRougeDupThreshold = 0.7;

struct InstructionMatch {
    bool duplicate = false;
    double score = 0.0;
    std::optional<std::string> nearest_id;
};

/// Reference form of the instruction duplicate test: linear scan of
/// rouge_l(candidate, existing) over the pool.
InstructionMatch is_instruction_dup(std::string_view candidate,
                                    const std::vector<std::pair<std::string, std::string>>& pool,
                                    double threshold = kRougeDupThreshold);

/// Accepted-instruction pool with interned tokens. Produces the same answers
/// as is_instruction_dup but skips entries whose length-only F1 bound cannot
/// beat the best score seen so far.
///
/// Single writer: check() may run concurrently, add() must be serialised.
class InstructionIndex {
public:
    explicit InstructionIndex(double threshold = kRougeDupThreshold) : threshold_(threshold) {}

    InstructionMatch check(std::string_view candidate) const;
    void add(std::string id, std::string_view text);

    std::size_t size() const { return ids_.size(); }
    double threshold() const { return threshold_; }

private:
    std::vector<std::uint32_t> encode(std::string_view text) const;

    double threshold_;
    std::unordered_map<std::string, std::uint32_t> vocab_;
    std::vector<std::string> ids_;
    std::vector<std::vector<std::uint32_t>> tokens_;
};

}  // namespace editforge
