#include "rcsearch/mol/smiles.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rcsearch/error.hpp"
#include "rcsearch/mol/elements.hpp"

namespace rcs::mol {
namespace {

struct PendingBond {
  std::optional<BondOrder> order;
  BondDirection direction = BondDirection::kNone;
  bool set() const { return order.has_value() || direction != BondDirection::kNone; }
};

struct RingOpen {
  int atom;
  PendingBond bond;
  std::size_t position;
};

class SmilesParser {
 public:
  explicit SmilesParser(std::string_view text) : text_(text) {}

  MolGraph parse() {
    if (text_.empty()) throw Error(ErrorCode::kEmptyInput, "empty SMILES string");
    for (char c : text_) {
      if (static_cast<unsigned char>(c) > 127) fail(ErrorCode::kInvalidSyntax, "non-ASCII character");
    }
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '(') {
        if (prev_ < 0) fail(ErrorCode::kInvalidSyntax, "branch before any atom");
        branches_.push_back({prev_, pos_});
        ++pos_;
      } else if (c == ')') {
        if (branches_.empty()) fail(ErrorCode::kUnbalancedBranch, "unexpected ')'");
        if (pending_.set()) fail(ErrorCode::kInvalidSyntax, "bond symbol before ')'");
        prev_ = branches_.back().first;
        branches_.pop_back();
        ++pos_;
      } else if (c == '.') {
        if (pending_.set()) fail(ErrorCode::kInvalidSyntax, "bond symbol before '.'");
        prev_ = -1;
        ++pos_;
      } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '/' || c == '\\') {
        if (pending_.set()) fail(ErrorCode::kInvalidSyntax, "consecutive bond symbols");
        read_bond_symbol();
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        ring_closure();
      } else if (c == '[') {
        add_atom(read_bracket_atom());
      } else {
        add_atom(read_organic_atom());
      }
    }
    if (!branches_.empty()) {
      pos_ = branches_.back().second;
      fail(ErrorCode::kUnbalancedBranch, "unclosed '('");
    }
    if (!rings_.empty()) {
      pos_ = rings_.begin()->second.position;
      fail(ErrorCode::kUnmatchedRingBond, "ring closure " + std::to_string(rings_.begin()->first) + " never closed");
    }
    if (pending_.set()) fail(ErrorCode::kInvalidSyntax, "trailing bond symbol");
    return MolGraph(std::move(atoms_), std::move(bonds_));
  }

 private:
  [[noreturn]] void fail(ErrorCode code, const std::string &what) const {
    throw Error(code, what + " at position " + std::to_string(pos_));
  }

  void read_bond_symbol() {
    switch (text_[pos_]) {
      case '-': pending_.order = BondOrder::kSingle; break;
      case '=': pending_.order = BondOrder::kDouble; break;
      case '#': pending_.order = BondOrder::kTriple; break;
      case ':': pending_.order = BondOrder::kAromatic; break;
      case '/': pending_.direction = BondDirection::kUp; break;
      case '\\': pending_.direction = BondDirection::kDown; break;
      default: break;
    }
    ++pos_;
  }

  BondOrder resolve_order(const PendingBond &b, int x, int y) const {
    if (b.order) return *b.order;
    const bool both_aromatic =
        atoms_[static_cast<std::size_t>(x)].aromatic && atoms_[static_cast<std::size_t>(y)].aromatic;
    return both_aromatic && b.direction == BondDirection::kNone ? BondOrder::kAromatic : BondOrder::kSingle;
  }

  void connect(int x, int y, const PendingBond &b) {
    for (const Bond &e : bonds_) {
      if ((e.a == x && e.b == y) || (e.a == y && e.b == x)) {
        fail(ErrorCode::kInvalidSyntax, "duplicate bond");
      }
    }
    if (x == y) fail(ErrorCode::kInvalidSyntax, "ring closure onto the same atom");
    Bond bond;
    bond.a = x;
    bond.b = y;
    bond.order = resolve_order(b, x, y);
    bond.direction = static_cast<int>(b.direction);
    bonds_.push_back(bond);
  }

  void add_atom(const Atom &atom) {
    const int id = static_cast<int>(atoms_.size());
    atoms_.push_back(atom);
    if (prev_ >= 0) {
      connect(prev_, id, pending_);
    } else if (pending_.set()) {
      fail(ErrorCode::kInvalidSyntax, "bond symbol without a preceding atom");
    }
    pending_ = {};
    prev_ = id;
  }

  void ring_closure() {
    const std::size_t start = pos_;
    if (prev_ < 0) fail(ErrorCode::kInvalidSyntax, "ring closure before any atom");
    int label = 0;
    if (text_[pos_] == '%') {
      if (pos_ + 2 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
          !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))) {
        fail(ErrorCode::kInvalidSyntax, "'%' must be followed by two digits");
      }
      label = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
      pos_ += 3;
    } else {
      label = text_[pos_] - '0';
      ++pos_;
    }
    auto it = rings_.find(label);
    if (it == rings_.end()) {
      rings_.emplace(label, RingOpen{prev_, pending_, start});
    } else {
      const RingOpen open = it->second;
      rings_.erase(it);
      PendingBond b = pending_;
      if (open.bond.set() && b.set() && open.bond.order && b.order && *open.bond.order != *b.order) {
        fail(ErrorCode::kInvalidSyntax, "conflicting ring-closure bond orders");
      }
      if (!b.order) b.order = open.bond.order;
      if (b.direction == BondDirection::kNone) b.direction = open.bond.direction;
      connect(open.atom, prev_, b);
    }
    pending_ = {};
  }

  Atom read_organic_atom() {
    const char c = text_[pos_];
    Atom atom;
    auto take = [&](int z, std::size_t len, bool aromatic) {
      atom.z = z;
      atom.aromatic = aromatic;
      pos_ += len;
    };
    const char next = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
    switch (c) {
      case 'B': next == 'r' ? take(35, 2, false) : take(5, 1, false); break;
      case 'C': next == 'l' ? take(17, 2, false) : take(6, 1, false); break;
      case 'N': take(7, 1, false); break;
      case 'O': take(8, 1, false); break;
      case 'P': take(15, 1, false); break;
      case 'S': take(16, 1, false); break;
      case 'F': take(9, 1, false); break;
      case 'I': take(53, 1, false); break;
      case 'b': take(5, 1, true); break;
      case 'c': take(6, 1, true); break;
      case 'n': take(7, 1, true); break;
      case 'o': take(8, 1, true); break;
      case 'p': take(15, 1, true); break;
      case 's': take(16, 1, true); break;
      default:
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '*') {
          fail(ErrorCode::kUnknownElement, std::string("unsupported atom '") + c + "'");
        }
        fail(ErrorCode::kInvalidSyntax, std::string("unexpected character '") + c + "'");
    }
    return atom;
  }

  Atom read_bracket_atom() {
    const std::size_t open = pos_;
    const std::size_t close = text_.find(']', pos_);
    if (close == std::string_view::npos) fail(ErrorCode::kInvalidSyntax, "unterminated bracket atom");
    ++pos_;
    auto peek = [&]() { return pos_ < close ? text_[pos_] : '\0'; };
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;  // isotope, ignored

    Atom atom;
    const char first = peek();
    if (std::isupper(static_cast<unsigned char>(first))) {
      std::string symbol(1, first);
      ++pos_;
      const char second = peek();
      if (std::islower(static_cast<unsigned char>(second)) && atomic_number(symbol + second)) {
        symbol += second;
        ++pos_;
      }
      const auto z = atomic_number(symbol);
      if (!z) fail(ErrorCode::kUnknownElement, "unknown element '" + symbol + "'");
      atom.z = *z;
    } else if (std::islower(static_cast<unsigned char>(first))) {
      // aromatic bracket symbols: b c n o p s se as
      std::string symbol(1, first);
      ++pos_;
      if ((first == 's' && peek() == 'e') || (first == 'a' && peek() == 's')) {
        symbol += peek();
        ++pos_;
      }
      static const std::map<std::string, int> kAromatic = {{"b", 5},  {"c", 6},  {"n", 7},   {"o", 8},
                                                           {"p", 15}, {"s", 16}, {"se", 34}, {"as", 33}};
      const auto it = kAromatic.find(symbol);
      if (it == kAromatic.end()) fail(ErrorCode::kUnknownElement, "unknown aromatic element '" + symbol + "'");
      atom.z = it->second;
      atom.aromatic = true;
    } else {
      fail(ErrorCode::kUnknownElement, "missing element symbol in bracket atom");
    }

    while (peek() == '@') ++pos_;  // chirality is not modelled

    int hcount = 0;
    if (peek() == 'H') {
      ++pos_;
      hcount = 1;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        hcount = peek() - '0';
        ++pos_;
      }
    }
    atom.explicit_h = hcount;

    if (peek() == '+' || peek() == '-') {
      const char sign = peek();
      int magnitude = 0;
      while (peek() == sign) {
        ++magnitude;
        ++pos_;
      }
      if (magnitude == 1 && std::isdigit(static_cast<unsigned char>(peek()))) {
        magnitude = 0;
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
          magnitude = magnitude * 10 + (peek() - '0');
          ++pos_;
        }
      }
      atom.formal_charge = sign == '+' ? magnitude : -magnitude;
    }
    if (peek() == ':') {  // atom-map class, ignored
      ++pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    }
    if (pos_ != close) {
      pos_ = open;
      fail(ErrorCode::kInvalidSyntax, "malformed bracket atom");
    }
    pos_ = close + 1;
    return atom;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int prev_ = -1;
  PendingBond pending_;
  std::vector<std::pair<int, std::size_t>> branches_;
  std::map<int, RingOpen> rings_;
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
};

}  // namespace

MolGraph parse_smiles(std::string_view text) { return SmilesParser(text).parse(); }

}  // namespace rcs::mol
