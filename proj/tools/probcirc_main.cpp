#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "probcirc/axioms.hpp"
#include "probcirc/circuit.hpp"
#include "probcirc/circuit_text.hpp"
#include "probcirc/matrix.hpp"
#include "probcirc/normalform.hpp"
#include "probcirc/surface.hpp"

namespace pc = probcirc;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pc::Error("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Loaded {
  pc::Circuit circuit;
  bool was_program = false;
  bool closed = false;  // program with an empty context
};

/// A file holds either a circuit term or a program; circuit syntax is tried
/// first, and a program is compiled to its circuit.
Loaded load(const std::string& path) {
  std::string text = read_file(path);
  try {
    return {pc::flatten(pc::parse_circuit(text)), false, false};
  } catch (const pc::SyntaxError& circuit_err) {
    try {
      pc::surface::Program prog = pc::surface::parse_program(text);
      pc::surface::TypedProgram tp = pc::surface::typecheck_program(prog);
      return {pc::flatten(pc::surface::translate(prog)), true,
              tp.context.empty()};
    } catch (const pc::SyntaxError& prog_err) {
      throw pc::SyntaxError(
          std::string("'") + path + "' parses neither as a circuit [" +
              circuit_err.what() + "] nor as a program [" + prog_err.what() +
              "]",
          0, 0);
    }
  }
}

std::string word_bits(long long w, int n) {
  std::string s;
  for (int b = n - 1; b >= 0; --b) s.push_back((w >> b) & 1 ? '1' : '0');
  return s;
}

void print_class_human(const pc::ProjClass& cls, std::ostream& os) {
  if (cls.bottom) {
    os << "bottom: every outcome has weight zero\n";
    return;
  }
  if (cls.in == 0) {
    for (Eigen::Index y = 0; y < cls.canon.rows(); ++y)
      os << "P[" << word_bits(y, cls.out)
         << "] = " << pc::rat_str(cls.canon(y, 0)) << "\n";
    return;
  }
  os << "normalised " << (1 << cls.out) << " x " << (1 << cls.in)
     << " matrix (rows = output words, columns = input words):\n";
  for (Eigen::Index y = 0; y < cls.canon.rows(); ++y) {
    os << word_bits(y, cls.out) << " |";
    for (Eigen::Index x = 0; x < cls.canon.cols(); ++x)
      os << " " << pc::rat_str(cls.canon(y, x));
    os << "\n";
  }
}

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const pc::CapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const pc::SyntaxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const pc::TypeMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const pc::surface::UnboundVariable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const pc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "exact analysis of discrete probabilistic circuits and programs"};
  app.require_subcommand(1);
  app.fallthrough();  // accept --json / --cap after the subcommand too

  bool as_json = false;
  long long cap = 1LL << 20;
  app.add_flag("--json", as_json, "machine-readable JSON output");
  app.add_option("--cap", cap,
                 "largest matrix cell count the evaluator will build");

  std::string file_a, file_b;

  CLI::App* cmd_compile =
      app.add_subcommand("compile", "translate a program to a circuit term");
  cmd_compile->add_option("file", file_a)->required();

  CLI::App* cmd_infer = app.add_subcommand(
      "infer", "exact outcome distribution / conditional matrix");
  cmd_infer->add_option("file", file_a)->required();

  CLI::App* cmd_equiv = app.add_subcommand(
      "equiv", "decide equivalence of two circuits or programs");
  cmd_equiv->add_option("first", file_a)->required();
  cmd_equiv->add_option("second", file_b)->required();

  CLI::App* cmd_normalize = app.add_subcommand(
      "normalize", "normal form of a conditioning-free circuit");
  cmd_normalize->add_option("file", file_a)->required();

  CLI::App* cmd_eliminate = app.add_subcommand(
      "eliminate", "push conditioning out of a circuit");
  cmd_eliminate->add_option("file", file_a)->required();

  int trials = 100;
  std::uint64_t seed = 12345;
  CLI::App* cmd_axioms = app.add_subcommand(
      "axioms-check", "randomised soundness check of every rewrite rule");
  cmd_axioms->add_option("--trials", trials, "trials per rule");
  cmd_axioms->add_option("--seed", seed, "random seed");

  CLI::App* cmd_derive = app.add_subcommand(
      "derive-check", "replay and verify a derivation file");
  cmd_derive->add_option("file", file_a)->required();

  CLI11_PARSE(app, argc, argv);
  pc::EvalOptions opts{cap};

  if (cmd_compile->parsed()) {
    return guarded([&] {
      Loaded l = load(file_a);
      pc::CircType t = pc::circ_type(l.circuit);
      if (as_json)
        std::cout << json{{"circuit", pc::serialize(l.circuit)},
                          {"in", t.in},
                          {"out", t.out}}
                         .dump()
                  << "\n";
      else
        std::cout << pc::serialize(l.circuit) << "\n";
      return 0;
    });
  }

  if (cmd_infer->parsed()) {
    return guarded([&] {
      Loaded l = load(file_a);
      pc::ProjClass cls = pc::canonical_class(pc::eval(l.circuit, opts));
      if (as_json)
        std::cout << pc::class_json(cls) << "\n";
      else
        print_class_human(cls, std::cout);
      return 0;
    });
  }

  if (cmd_equiv->parsed()) {
    return guarded([&] {
      Loaded a = load(file_a);
      Loaded b = load(file_b);
      pc::CircType ta = pc::circ_type(a.circuit);
      pc::CircType tb = pc::circ_type(b.circuit);
      bool same_type = ta == tb;
      bool eq = same_type && pc::equiv(a.circuit, b.circuit, opts);
      if (as_json)
        std::cout << json{{"equivalent", eq}}.dump() << "\n";
      else if (eq)
        std::cout << "equivalent\n";
      else if (!same_type)
        std::cout << "inequivalent (types " << ta.in << "->" << ta.out
                  << " vs " << tb.in << "->" << tb.out << ")\n";
      else
        std::cout << "inequivalent\n";
      return eq ? 0 : 1;
    });
  }

  if (cmd_normalize->parsed()) {
    return guarded([&] {
      Loaded l = load(file_a);
      pc::Circuit nf = pc::normal_form(l.circuit, opts);
      pc::CptChain chain = pc::cpt_chain(pc::eval(l.circuit, opts));
      if (as_json)
        std::cout << json{{"circuit", pc::serialize(nf)},
                          {"cpt", json::parse(pc::cpt_json(chain))}}
                         .dump()
                  << "\n";
      else
        std::cout << pc::serialize(nf) << "\n";
      return 0;
    });
  }

  if (cmd_eliminate->parsed()) {
    return guarded([&] {
      Loaded l = load(file_a);
      pc::Circuit out = pc::eliminate_conditioning(l.circuit, opts);
      bool bottom = pc::canonical_class(pc::eval(l.circuit, opts)).bottom;
      if (as_json)
        std::cout << json{{"circuit", pc::serialize(out)},
                          {"bottom", bottom}}
                         .dump()
                  << "\n";
      else
        std::cout << pc::serialize(out) << "\n";
      return 0;
    });
  }

  if (cmd_axioms->parsed()) {
    return guarded([&] {
      std::vector<pc::SoundnessReport> reports =
          pc::check_all_axioms(trials, seed);
      bool all_ok = true;
      json arr = json::array();
      for (const pc::SoundnessReport& r : reports) {
        bool ok = r.passes == r.trials;
        all_ok = all_ok && ok;
        if (as_json) {
          json item{{"rule", r.name},
                    {"trials", r.trials},
                    {"passes", r.passes},
                    {"up_to_scaling", r.propositional}};
          if (!ok) item["counterexample"] = r.counterexample;
          arr.push_back(item);
        } else {
          std::cout << (ok ? "PASS " : "FAIL ") << r.name << " ("
                    << r.passes << "/" << r.trials << ")"
                    << (r.propositional ? " [up to scaling]" : "") << "\n";
          if (!ok) std::cout << "  " << r.counterexample << "\n";
        }
      }
      if (as_json) std::cout << arr.dump() << "\n";
      return all_ok ? 0 : 1;
    });
  }

  if (cmd_derive->parsed()) {
    return guarded([&] {
      pc::Derivation d = pc::derivation_from_json(read_file(file_a));
      pc::DerivationTrace tr = pc::check_derivation(d, opts);
      if (as_json) {
        json out{{"ok", tr.ok}, {"terms", tr.terms}};
        if (!tr.ok) {
          out["failed_step"] = tr.failed_step;
          out["error"] = tr.error;
        }
        std::cout << out.dump() << "\n";
      } else if (tr.ok) {
        std::cout << "ok: " << d.steps.size() << " step(s) verified\n";
      } else {
        std::cout << "failed at step " << tr.failed_step << ": " << tr.error
                  << "\n";
      }
      return tr.ok ? 0 : 1;
    });
  }

  return 0;
}
