#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "astro/dataset.hpp"
#include "astro/rng.hpp"

namespace astro::synthetic {

// A method template. `$A`..`$G` and `$M` are identifier slots, '#' an integer
// literal slot and a backtick a string literal slot. `independent` lists leading body
// statements whose order does not matter.
struct Template {
  std::string head;
  std::vector<std::string> independent;
  std::string tail;
};

inline const std::vector<Template>& templates() {
  static const std::vector<Template> t = {
      {"int $M(int[] $A) {", {"int $B = #;"}, "for (int $C = 0; $C < $A.length; $C++) { $B += $A[$C]; } return $B; }"},
      {"int $M(int[] $A) {", {"int $B = $A[0];"},
       "for (int $C : $A) { if ($C > $B) { $B = $C; } } return $B; }"},
      {"String $M(String $A) {", {"StringBuilder $B = new StringBuilder();"},
       "for (int $C = $A.length() - 1; $C >= 0; $C--) { $B.append($A.charAt($C)); } return $B.toString(); }"},
      {"long $M(int $A) {", {}, "if ($A <= 1) { return $A; } return $M($A - 1) + $M($A - 2); }"},
      {"int $M(int[] $A, int $B) {", {"int $C = 0;", "int $D = $A.length - 1;"},
       "while ($C <= $D) { int $E = ($C + $D) / 2; if ($A[$E] == $B) { return $E; } else if ($A[$E] < $B) { $C = $E + 1; } "
       "else { $D = $E - 1; } } return -#; }"},
      {"void $M(int[] $A) {", {},
       "for (int $B = 0; $B < $A.length; $B++) { for (int $C = 0; $C < $A.length - $B - 1; $C++) { if ($A[$C] > $A[$C + 1]) "
       "{ int $D = $A[$C]; $A[$C] = $A[$C + 1]; $A[$C + 1] = $D; } } } }"},
      {"void $M(String $A, String $B) throws IOException {", {"byte[] $C = new byte[#];"},
       "try (InputStream $D = new FileInputStream($A); OutputStream $E = new FileOutputStream($B)) { int $F; "
       "while (($F = $D.read($C)) > 0) { $E.write($C, 0, $F); } } catch (IOException $F) { $F.printStackTrace(); } }"},
      {"Map<String, Integer> $M(String $A) {", {"Map<String, Integer> $B = new HashMap<>();"},
       "for (String $C : $A.split(`)) { $B.put($C, $B.getOrDefault($C, 0) + 1); } return $B; }"},
      {"long $M(int $A) {", {}, "return $A <= 1 ? # : $A * $M($A - 1); }"},
      {"int $M(int $A, int $B) {", {}, "while ($B != 0) { int $C = $B; $B = $A % $B; $A = $C; } return $A; }"},
      {"double[][] $M(double[][] $A, double[][] $B) {", {"int $D = $A.length;"},
       "double[][] $C = new double[$D][$D]; for (int $E = 0; $E < $D; $E++) for (int $F = 0; $F < $D; $F++) "
       "for (int $G = 0; $G < $D; $G++) $C[$E][$F] += $A[$E][$G] * $B[$G][$F]; return $C; }"},
      {"boolean $M(int $A) {", {},
       "if ($A < 2) return false; for (int $B = 2; $B * $B <= $A; $B++) { if ($A % $B == 0) return false; } return true; }"},
      {"String $M(List<String> $A, String $B) {", {"StringBuilder $C = new StringBuilder();", "boolean $D = true;"},
       "for (String $E : $A) { if (!$D) { $C.append($B); } $C.append($E); $D = false; } return $C.toString(); }"},
      {"List<Integer> $M(List<Integer> $A, int $B) {", {"List<Integer> $C = new ArrayList<>();"},
       "$A.stream().filter($D -> $D > $B).forEach($C::add); return $C; }"},
      {"String $M(int $A) {", {},
       "switch ($A) { case 1: return `; case 2: return `; case 3: return `; default: throw new IllegalArgumentException(`); } }"},
      {"List<String> $M(String $A) throws IOException {", {"List<String> $B = new ArrayList<>();"},
       "BufferedReader $C = new BufferedReader(new FileReader($A)); try { String $D; while (($D = $C.readLine()) != null) "
       "{ $B.add($D.trim()); } } finally { $C.close(); } return $B; }"},
      {"boolean $M(String $A) {", {"int $B = 0;", "int $C = $A.length() - 1;"},
       "while ($B < $C) { if ($A.charAt($B++) != $A.charAt($C--)) { return false; } } return true; }"},
      {"double $M(double[] $A) {", {"double $B = 0;"},
       "if ($A == null || $A.length == 0) { throw new IllegalArgumentException(`); } for (double $C : $A) $B += $C; "
       "return $B / $A.length; }"},
      {"int $M(String $A) {", {"int $B = #;", "int $C = 0;"},
       "do { $B = 31 * $B + $A.charAt($C); $C++; } while ($C < $A.length()); return $B; }"},
      {"int[] $M(int[] $A, int $B) {", {"int $C = Math.min($B, $A.length);"},
       "int[] $D = new int[$B]; System.arraycopy($A, 0, $D, 0, $C); synchronized (this) { $D[0] = $C > 0 ? $D[0] : -#; } "
       "return $D; }"},
  };
  return t;
}

struct Options {
  std::size_t templates = 20;
  std::size_t variants = 4;          // renamed copies per template
  bool permute_independent = false;  // also shuffle order-independent statements in variants
  double negative_ratio = 1.0;       // cross-template pairs per clone pair
  SplitFractions fractions;
  std::uint64_t seed = 0;
};

struct Corpus {
  std::vector<Program> programs;
  std::vector<PairRecord> pairs;  // with split column filled in
};

inline std::string instantiate(const Template& t, std::uint64_t seed, bool permute) {
  static const std::vector<std::string> pool = {
      "alpha", "beta",  "gamma", "delta", "count", "total", "value", "item",  "index", "left",  "right", "mid",
      "buf",   "data",  "result", "acc",  "cur",   "tmp",   "elem",  "node",  "key",   "val",   "size",  "limit",
      "src",   "dst",   "input", "output", "line", "word",  "flag",  "first", "last",  "pivot", "probe", "step"};
  Rng rng(seed);
  std::vector<std::string> names = pool;
  std::shuffle(names.begin(), names.end(), rng);
  std::map<char, std::string> slot;
  std::size_t next = 0;
  std::uniform_int_distribution<int> lit(1, 999);

  std::vector<std::string> body = t.independent;
  if (permute) std::shuffle(body.begin(), body.end(), rng);
  std::string text = t.head + " ";
  for (const auto& s : body) text += s + " ";
  text += t.tail;

  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '$' && i + 1 < text.size()) {
      char key = text[++i];
      auto it = slot.find(key);
      if (it == slot.end()) it = slot.emplace(key, names[next++] + (key == 'M' ? "Fn" : "")).first;
      out += it->second;
    } else if (c == '#') {
      out += std::to_string(lit(rng));
    } else if (c == '`') {
      out += "\"s" + std::to_string(lit(rng)) + "\"";
    } else {
      out += c;
    }
  }
  return out;
}

// Type-2 clone corpus: every template is instantiated `variants` times with
// fresh identifier names and literal values. Same-template pairs are clones,
// cross-template pairs are not.
inline Corpus generate(const Options& opt) {
  const auto& all = templates();
  const std::size_t n_templates = std::min(opt.templates, all.size());
  Corpus c;
  for (std::size_t t = 0; t < n_templates; ++t) {
    for (std::size_t v = 0; v < opt.variants; ++v) {
      std::uint64_t s = derive_seed(derive_seed(opt.seed, "synthetic"), t * 1000 + v);
      c.programs.push_back({"t" + std::to_string(t) + "_v" + std::to_string(v),
                            instantiate(all[t], s, opt.permute_independent && v > 0)});
    }
  }
  auto id = [&](std::size_t t, std::size_t v) { return c.programs[t * opt.variants + v].id; };

  std::vector<PairRecord> positives, negatives;
  for (std::size_t t = 0; t < n_templates; ++t)
    for (std::size_t a = 0; a < opt.variants; ++a)
      for (std::size_t b = a + 1; b < opt.variants; ++b) positives.push_back({id(t, a), id(t, b), 1, ""});

  Rng rng(derive_seed(opt.seed, "synthetic_pairs"));
  const auto n_neg = static_cast<std::size_t>(std::llround(opt.negative_ratio * static_cast<double>(positives.size())));
  std::set<std::pair<std::string, std::string>> used;
  std::uniform_int_distribution<std::size_t> pick_t(0, n_templates - 1), pick_v(0, opt.variants - 1);
  const std::size_t max_neg = n_templates * (n_templates - 1) / 2 * opt.variants * opt.variants;
  while (n_templates > 1 && negatives.size() < std::min(n_neg, max_neg)) {
    std::size_t ta = pick_t(rng), tb = pick_t(rng);
    if (ta == tb) continue;
    if (ta > tb) std::swap(ta, tb);
    auto a = id(ta, pick_v(rng)), b = id(tb, pick_v(rng));
    if (!used.emplace(a, b).second) continue;
    negatives.push_back({a, b, 0, ""});
  }

  c.pairs = positives;
  c.pairs.insert(c.pairs.end(), negatives.begin(), negatives.end());
  std::vector<std::size_t> order(c.pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const auto n = static_cast<double>(c.pairs.size());
  const auto n_train = static_cast<std::size_t>(std::llround(opt.fractions.train * n));
  const auto n_val = static_cast<std::size_t>(std::llround(opt.fractions.val * n));
  for (std::size_t r = 0; r < order.size(); ++r)
    c.pairs[order[r]].split = r < n_train ? "train" : r < n_train + n_val ? "val" : "test";
  return c;
}

}  // namespace astro::synthetic
