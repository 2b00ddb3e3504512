#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <utility>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace platefuse {

/// Index into an Alphabet.
using ClassId = int;

/// Ordered character classes with look-alike pairs folded together.
///
/// The default alphabet is the 34-class Latin/digit set in which 'O' is read
/// as class '0' and 'I' as class '1'. Which of the two a merged class means
/// is decided later from the plate layout.
class Alphabet {
 public:
  struct Merge {
    char alias;
    char canonical;
  };

  Alphabet(std::string labels, std::vector<Merge> merges)
      : labels_(std::move(labels)), merges_(std::move(merges)) {
    index_.fill(-1);
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      auto& slot = index_[static_cast<unsigned char>(labels_[i])];
      if (slot >= 0) throw std::invalid_argument("duplicate class label");
      slot = static_cast<ClassId>(i);
    }
    for (const auto& m : merges_) {
      const ClassId target = index_[static_cast<unsigned char>(m.canonical)];
      if (target < 0) throw std::invalid_argument("merge target is not a class");
      if (index_[static_cast<unsigned char>(m.alias)] >= 0) {
        throw std::invalid_argument("merge alias is already a class");
      }
      index_[static_cast<unsigned char>(m.alias)] = target;
    }
  }

  static const Alphabet& merged_latin() {
    static const Alphabet kAlphabet("0123456789ABCDEFGHJKLMNPQRSTUVWXYZ",
                                    {{'O', '0'}, {'I', '1'}});
    return kAlphabet;
  }

  std::size_t size() const { return labels_.size(); }

  std::optional<ClassId> find(char label) const {
    const ClassId id = index_[static_cast<unsigned char>(label)];
    if (id < 0) return std::nullopt;
    return id;
  }

  ClassId id_of(char label) const {
    auto id = find(label);
    if (!id) throw std::invalid_argument(std::string("unknown class label '") + label + "'");
    return *id;
  }

  char label(ClassId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= labels_.size()) {
      throw std::out_of_range("class id out of range");
    }
    return labels_[static_cast<std::size_t>(id)];
  }

  /// Folds every aliased character of `text` onto its canonical class label.
  std::string merge(std::string_view text) const {
    std::string out(text);
    for (auto& ch : out) {
      for (const auto& m : merges_) {
        if (ch == m.alias) ch = m.canonical;
      }
    }
    return out;
  }

 private:
  std::string labels_;
  std::vector<Merge> merges_;
  std::array<ClassId, 256> index_{};
};

enum class SlotKind { alphabetic, numeric, any };

/// Positional plate template. Written as a string over {A, N, ?}; '-' and
/// ' ' are ignored and '/' starts the second row of a two-row plate, e.g.
/// "AAA-NNNN" or "NNA/NNNNN".
struct LayoutSpec {
  std::vector<SlotKind> slots;
  int rows = 1;
  std::size_t row_break = 0;  // first slot of the second row; two-row layouts only

  static LayoutSpec parse(std::string_view pattern) {
    LayoutSpec spec;
    std::size_t first_row = 0;
    for (char ch : pattern) {
      switch (ch) {
        case 'A': spec.slots.push_back(SlotKind::alphabetic); break;
        case 'N': spec.slots.push_back(SlotKind::numeric); break;
        case '?': spec.slots.push_back(SlotKind::any); break;
        case '-':
        case ' ': break;
        case '/':
          if (spec.rows == 2 || spec.slots.empty()) {
            throw std::invalid_argument("layout may have at most two non-empty rows");
          }
          spec.rows = 2;
          first_row = spec.slots.size();
          spec.row_break = first_row;
          break;
        default:
          throw std::invalid_argument("invalid layout character '" + std::string(1, ch) + "'");
      }
    }
    if (spec.slots.empty()) throw std::invalid_argument("empty layout pattern");
    if (spec.rows == 2 && spec.slots.size() == first_row) {
      throw std::invalid_argument("layout may have at most two non-empty rows");
    }
    return spec;
  }

  static LayoutSpec brazilian() { return parse("AAANNNN"); }

  std::size_t length() const { return slots.size(); }

  /// Canonical string form, '/' between rows.
  std::string pattern() const {
    std::string out;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto k = slots[i];
      if (rows == 2 && i == row_break) out += '/';
      out += k == SlotKind::alphabetic ? 'A' : k == SlotKind::numeric ? 'N' : '?';
    }
    return out;
  }
};

struct LayoutViolation {
  enum class Kind { length, category };
  Kind kind = Kind::category;
  std::size_t index = 0;  // unused for length violations

  friend bool operator==(const LayoutViolation&, const LayoutViolation&) = default;
};

inline bool is_letter(char ch) { return ch >= 'A' && ch <= 'Z'; }
inline bool is_digit(char ch) { return ch >= '0' && ch <= '9'; }

/// Positions whose character category contradicts the layout; a single
/// length violation when the sizes differ.
inline std::vector<LayoutViolation> validate(std::string_view text, const LayoutSpec& layout) {
  if (text.size() != layout.length()) return {{LayoutViolation::Kind::length, 0}};
  std::vector<LayoutViolation> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const bool ok = layout.slots[i] == SlotKind::any ||
                    (layout.slots[i] == SlotKind::alphabetic && is_letter(text[i])) ||
                    (layout.slots[i] == SlotKind::numeric && is_digit(text[i]));
    if (!ok) out.push_back({LayoutViolation::Kind::category, i});
  }
  return out;
}

struct Disambiguation {
  std::string text;
  bool length_mismatch = false;
  std::vector<LayoutViolation> violations;  // of the returned text
};

/// Resolves the merged look-alike classes by slot: 0/O becomes 'O' in
/// alphabetic slots and '0' in numeric ones; likewise I/1. Other characters
/// and '?' slots are left alone. Length mismatches return the text unchanged.
inline Disambiguation disambiguate(std::string_view text, const LayoutSpec& layout) {
  Disambiguation out{std::string(text), false, {}};
  if (text.size() != layout.length()) {
    out.length_mismatch = true;
    out.violations = validate(text, layout);
    return out;
  }
  for (std::size_t i = 0; i < out.text.size(); ++i) {
    char& ch = out.text[i];
    switch (layout.slots[i]) {
      case SlotKind::alphabetic:
        if (ch == '0') ch = 'O';
        if (ch == '1') ch = 'I';
        break;
      case SlotKind::numeric:
        if (ch == 'O') ch = '0';
        if (ch == 'I') ch = '1';
        break;
      case SlotKind::any: break;
    }
  }
  out.violations = validate(out.text, layout);
  return out;
}

}  // namespace platefuse
