#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace clickstream {

/// Level-1 click operations. The enumerator order is the canonical state
/// order used for transition matrices and proportion vectors.
enum class ClickOp : std::uint8_t { Pl, Pa, Sf, SSf, Sb, SSb, Rf, Rs };

inline constexpr int kNumOps = 8;

inline constexpr std::array<ClickOp, kNumOps> kAllOps = {
    ClickOp::Pl, ClickOp::Pa, ClickOp::Sf, ClickOp::SSf,
    ClickOp::Sb, ClickOp::SSb, ClickOp::Rf, ClickOp::Rs};

using TokenSeq = std::vector<ClickOp>;

constexpr int index_of(ClickOp op) { return static_cast<int>(op); }

std::string_view op_name(ClickOp op);
std::optional<ClickOp> parse_op(std::string_view name);

/// "Pl,Pa,SSf" -> {Pl, Pa, SSf}. Throws std::invalid_argument on unknown names.
TokenSeq parse_token_list(std::string_view text, char sep = ',');

/// Concatenated form "PlPaSSfSf". Three-letter scroll symbols are matched
/// first, which makes the split unique.
TokenSeq parse_concatenated(std::string_view text);

std::string join_tokens(const TokenSeq& seq, std::string_view sep = ",");

}  // namespace clickstream
