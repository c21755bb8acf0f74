#include "probcirc/circuit_text.hpp"

#include <cctype>

#include "probcirc/gates.hpp"

namespace probcirc {

namespace {

void serialize_rec(const Circuit& c, std::string& out) {
  switch (c.kind()) {
    case NodeKind::Id:
      out += "id";
      return;
    case NodeKind::Id0:
      out += "id0";
      return;
    case NodeKind::Swap:
      out += "swap";
      return;
    case NodeKind::Gen:
      switch (c.gate()) {
        case GateTag::Copy:
          out += "copy";
          return;
        case GateTag::Discard:
          out += "del";
          return;
        case GateTag::And:
          out += "and";
          return;
        case GateTag::Not:
          out += "not";
          return;
        case GateTag::Cond:
          out += "cond";
          return;
        case GateTag::Flip:
          out += "flip(" + rat_str(c.flip_param()) + ")";
          return;
      }
      return;
    case NodeKind::Seq:
      out += "seq(";
      serialize_rec(c.first(), out);
      out += ", ";
      serialize_rec(c.second(), out);
      out += ")";
      return;
    case NodeKind::Par:
      out += "par(";
      serialize_rec(c.first(), out);
      out += ", ";
      serialize_rec(c.second(), out);
      out += ")";
      return;
  }
}

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  Circuit parse() {
    Circuit c = circuit();
    skip();
    if (pos_ < text_.size()) fail("trailing input after circuit");
    return c;
  }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;

  [[noreturn]] void fail(const std::string& msg) {
    throw SyntaxError(msg, line_, col_);
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip() {
    while (pos_ < text_.size()) {
      char ch = text_[pos_];
      if (ch == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        advance();
      } else {
        return;
      }
    }
  }

  void expect(char ch) {
    skip();
    if (pos_ >= text_.size() || text_[pos_] != ch)
      fail(std::string("expected '") + ch + "'");
    advance();
  }

  std::string word() {
    skip();
    std::string w;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_'))
      w.push_back(text_[pos_]), advance();
    if (w.empty()) fail("expected a circuit");
    return w;
  }

  Rat rational() {
    skip();
    std::string lit;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+'))
      lit.push_back(text_[pos_]), advance();
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '/' || text_[pos_] == '.'))
      lit.push_back(text_[pos_]), advance();
    try {
      return parse_rat(lit);
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  int natural() {
    Rat r = rational();
    if (r < 0 || r.get_den() != 1) fail("expected a natural number");
    if (r.get_num() > 1 << 24) fail("arity out of range");
    return static_cast<int>(r.get_num().get_si());
  }

  Circuit circuit() {
    skip();
    int at_line = line_, at_col = col_;
    std::string w = word();
    try {
      if (w == "seq" || w == "par") {
        expect('(');
        Circuit a = circuit();
        expect(',');
        Circuit b = circuit();
        expect(')');
        return w == "seq" ? Circuit::seq(a, b) : Circuit::par(a, b);
      }
      if (w == "id") return Circuit::id();
      if (w == "id0") return Circuit::id0();
      if (w == "swap") return Circuit::swap();
      if (w == "mux") return mux();
      if (w == "flip") {
        expect('(');
        Rat p = rational();
        expect(')');
        return Circuit::flip(p);
      }
      if (w == "fail") {
        expect('(');
        int m = natural();
        expect(',');
        int n = natural();
        expect(')');
        return failure_circuit(m, n);
      }
      bool with_arity = false;
      int arity = 0;
      skip();
      if ((w == "copy" || w == "del" || w == "and" || w == "not" ||
           w == "cond" || w == "or" || w == "all") &&
          pos_ < text_.size() && text_[pos_] == '(') {
        advance();
        arity = natural();
        expect(')');
        with_arity = true;
      }
      if (w == "copy") return with_arity ? copy_1_to_n(arity) : Circuit::copy_gate();
      if (w == "del") return with_arity ? discard_bundle(arity) : Circuit::discard();
      if (w == "and") return with_arity ? and_n(arity) : Circuit::and_gate();
      if (w == "not") return with_arity ? not_bundle(arity) : Circuit::not_gate();
      if (w == "cond") return with_arity ? cond_n(arity) : Circuit::cond();
      if (w == "or") return with_arity ? or_n(arity) : or2();
      if (w == "all") {
        if (!with_arity) fail("all requires an arity, e.g. all(2)");
        return all_n(arity);
      }
    } catch (const TypeMismatch& e) {
      throw TypeMismatch(std::string(e.what()) + " (at line " +
                         std::to_string(at_line) + ", column " +
                         std::to_string(at_col) + ")");
    }
    throw SyntaxError("unknown circuit name '" + w + "'", at_line, at_col);
  }
};

}  // namespace

std::string serialize(const Circuit& c) {
  std::string out;
  serialize_rec(flatten(c), out);
  return out;
}

Circuit parse_circuit(const std::string& text) {
  return Parser(text).parse();
}

}  // namespace probcirc
