#include "clickstream/tokens.hpp"

#include <stdexcept>

namespace clickstream {

namespace {
constexpr std::array<std::string_view, kNumOps> kNames = {
    "Pl", "Pa", "Sf", "SSf", "Sb", "SSb", "Rf", "Rs"};
}

std::string_view op_name(ClickOp op) { return kNames[index_of(op)]; }

std::optional<ClickOp> parse_op(std::string_view name) {
  for (int i = 0; i < kNumOps; ++i)
    if (kNames[i] == name) return static_cast<ClickOp>(i);
  return std::nullopt;
}

TokenSeq parse_token_list(std::string_view text, char sep) {
  TokenSeq out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    auto end = text.find(sep, start);
    auto piece = text.substr(start, end == std::string_view::npos ? end : end - start);
    while (!piece.empty() && (piece.front() == ' ' || piece.front() == '\t'))
      piece.remove_prefix(1);
    while (!piece.empty() && (piece.back() == ' ' || piece.back() == '\t' || piece.back() == '\r'))
      piece.remove_suffix(1);
    auto op = parse_op(piece);
    if (!op) throw std::invalid_argument("unknown click token '" + std::string(piece) + "'");
    out.push_back(*op);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

TokenSeq parse_concatenated(std::string_view text) {
  TokenSeq out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (i + 3 <= text.size()) {
      if (auto op = parse_op(text.substr(i, 3)); op) {
        out.push_back(*op);
        i += 3;
        continue;
      }
    }
    auto op = i + 2 <= text.size() ? parse_op(text.substr(i, 2)) : std::nullopt;
    if (!op)
      throw std::invalid_argument("cannot split '" + std::string(text) + "' at offset " +
                                  std::to_string(i));
    out.push_back(*op);
    i += 2;
  }
  return out;
}

std::string join_tokens(const TokenSeq& seq, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += sep;
    out += op_name(seq[i]);
  }
  return out;
}

}  // namespace clickstream
