#include "tdparse/features.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace tdparse {

namespace {

constexpr std::array<std::string_view, kNumAtomic> kAtomicNames = {
    "S0T", "S1T", "S2T", "S0L", "S0R", "S1L", "S1R", "S2L",
    "S2R", "Q0",  "Q1",  "Q2",  "PRED", "TID", "ACT"};

constexpr const char* kModelHeader = "tdparse-model v1";

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double parse_double(std::string_view s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ParseError("bad weight '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string_view atomic_name(Atomic a) { return kAtomicNames[static_cast<int>(a)]; }

std::optional<Atomic> atomic_from_name(std::string_view name) {
  for (int k = 0; k < kNumAtomic; ++k)
    if (kAtomicNames[k] == name) return static_cast<Atomic>(k);
  return std::nullopt;
}

FeatureClass feature_class(Atomic a) {
  switch (a) {
    case Atomic::kS0T:
    case Atomic::kS1T:
    case Atomic::kS2T: return FeatureClass::kType;
    case Atomic::kPred:
    case Atomic::kTid: return FeatureClass::kGrounding;
    case Atomic::kAct: return FeatureClass::kAction;
    default: return FeatureClass::kWord;
  }
}

AtomicValues atomic_features(const ParserState& s, const Action& a,
                             const Sentence& x, const Domain& d) {
  AtomicValues v;
  v.fill(kNoneValue);
  const StackNode* node = s.stack.get();
  for (int k = 0; k < 3 && node; ++k, node = node->below.get()) {
    const StackItem& item = node->item;
    v[static_cast<int>(Atomic::kS0T) + k] = item.value.type.str();
    v[static_cast<int>(Atomic::kS0L) + 2 * k] = x.tokens[item.left];
    v[static_cast<int>(Atomic::kS0R) + 2 * k] = x.tokens[item.right];
  }
  for (int k = 0; k < 3; ++k) {
    int pos = s.queue_pos + k;
    if (pos < x.size()) v[static_cast<int>(Atomic::kQ0) + k] = x.tokens[pos];
  }
  if (a.kind == ActionKind::kShift) {
    v[static_cast<int>(Atomic::kPred)] = d.entry(a.template_id).atoms_label;
    v[static_cast<int>(Atomic::kTid)] = std::to_string(a.template_id);
  }
  v[static_cast<int>(Atomic::kAct)] = std::string(a.name());
  return v;
}

// ---------------------------------------------------------------------------
// Templates

int FeatureTemplateSet::cost(const FeatureTemplate& t, const FeatureBudget& b) {
  int c = 0;
  for (Atomic a : t.atoms) {
    switch (feature_class(a)) {
      case FeatureClass::kType: c += b.type_cost; break;
      case FeatureClass::kAction: break;
      default: c += b.other_cost; break;
    }
  }
  return c;
}

bool FeatureTemplateSet::within_budget(const FeatureBudget& b) const {
  return std::all_of(templates_.begin(), templates_.end(),
                     [&](const FeatureTemplate& t) { return cost(t, b) <= b.limit; });
}

FeatureTemplateSet FeatureTemplateSet::default_set(const FeatureBudget& budget) {
  FeatureTemplateSet set;
  constexpr int n = kNumAtomic - 1;  // ACT is implicit
  auto consider = [&](std::vector<Atomic> atoms) {
    FeatureTemplate t;
    t.atoms = std::move(atoms);
    if (cost(t, budget) > budget.limit) return;
    for (Atomic a : t.atoms) {
      if (!t.name.empty()) t.name += "+";
      t.name += atomic_name(a);
    }
    set.templates_.push_back(std::move(t));
  };
  auto at = [](int k) { return static_cast<Atomic>(k); };
  for (int i = 0; i < n; ++i) consider({at(i)});
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) consider({at(i), at(j)});
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) consider({at(i), at(j), at(k)});
  return set;
}

FeatureTemplateSet FeatureTemplateSet::parse(std::string_view text) {
  FeatureTemplateSet set;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto hash = raw.find('#');
    std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    auto colon = s.find(':');
    if (colon == std::string::npos)
      throw ParseError("template line " + std::to_string(line) +
                       ": expected 'name: CLASS[,CLASS]*'");
    FeatureTemplate t;
    t.name = trim(s.substr(0, colon));
    if (t.name.empty() || t.name.find_first_of(" \t=|") != std::string::npos)
      throw ParseError("template line " + std::to_string(line) + ": bad name");
    std::istringstream classes(s.substr(colon + 1));
    std::string c;
    while (std::getline(classes, c, ',')) {
      auto a = atomic_from_name(trim(c));
      if (!a)
        throw ParseError("template line " + std::to_string(line) +
                         ": unknown class '" + trim(c) + "'");
      if (*a == Atomic::kAct) continue;
      if (std::find(t.atoms.begin(), t.atoms.end(), *a) != t.atoms.end())
        throw ParseError("template line " + std::to_string(line) +
                         ": repeated class '" + trim(c) + "'");
      t.atoms.push_back(*a);
    }
    for (const auto& other : set.templates_)
      if (other.name == t.name)
        throw ParseError("duplicate template name '" + t.name + "'");
    set.templates_.push_back(std::move(t));
  }
  return set;
}

std::string FeatureTemplateSet::save() const {
  std::string out;
  for (const auto& t : templates_) {
    out += t.name + ": ";
    for (std::size_t k = 0; k < t.atoms.size(); ++k) {
      if (k) out += ",";
      out += atomic_name(t.atoms[k]);
    }
    out += "\n";
  }
  return out;
}

bool FeatureTemplateSet::operator==(const FeatureTemplateSet& o) const {
  if (templates_.size() != o.templates_.size()) return false;
  for (std::size_t k = 0; k < templates_.size(); ++k)
    if (templates_[k].name != o.templates_[k].name ||
        templates_[k].atoms != o.templates_[k].atoms)
      return false;
  return true;
}

// ---------------------------------------------------------------------------
// Vectors

void FeatureVector::add(const std::string& feature, int count) {
  if (count == 0) return;
  auto [it, inserted] = counts_.try_emplace(feature, count);
  if (!inserted) {
    it->second += count;
    if (it->second == 0) counts_.erase(it);
  }
}

void FeatureVector::add(const FeatureVector& other, int scale) {
  for (const auto& [f, c] : other.counts_) add(f, c * scale);
}

int FeatureVector::get(const std::string& feature) const {
  auto it = counts_.find(feature);
  return it == counts_.end() ? 0 : it->second;
}

long long FeatureVector::squared_norm() const {
  long long s = 0;
  for (const auto& [f, c] : counts_) s += static_cast<long long>(c) * c;
  return s;
}

std::map<std::string, int> FeatureVector::sorted() const {
  return {counts_.begin(), counts_.end()};
}

FeatureVector operator-(const FeatureVector& a, const FeatureVector& b) {
  FeatureVector out = a;
  out.add(b, -1);
  return out;
}

double WeightVector::get(const std::string& feature) const {
  auto it = weights_.find(feature);
  return it == weights_.end() ? 0.0 : it->second;
}

void WeightVector::add(const std::string& feature, double value) {
  weights_[feature] += value;
}

void WeightVector::set(const std::string& feature, double value) {
  weights_[feature] = value;
}

double score(const FeatureVector& v, const WeightVector& w) {
  // Sorted so the sum does not depend on hash order.
  double s = 0.0;
  for (const auto& [f, c] : v.sorted()) s += c * w.get(f);
  return s;
}

// ---------------------------------------------------------------------------
// Model

std::vector<std::string> Model::features(const ParserState& s, const Action& a,
                                         const Sentence& x,
                                         const Domain& d) const {
  AtomicValues v = atomic_features(s, a, x, d);
  const std::string& act = v[static_cast<int>(Atomic::kAct)];
  std::vector<std::string> out;
  out.reserve(templates.size());
  for (const auto& t : templates.templates()) {
    std::string f = t.name;
    f += '=';
    for (Atomic at : t.atoms) {
      f += v[static_cast<int>(at)];
      f += '|';
    }
    f += act;
    out.push_back(std::move(f));
  }
  return out;
}

FeatureVector Model::extract(const ParserState& s, const Action& a,
                             const Sentence& x, const Domain& d) const {
  FeatureVector fv;
  for (const auto& f : features(s, a, x, d)) fv.add(f);
  return fv;
}

double Model::score(const ParserState& s, const Action& a, const Sentence& x,
                    const Domain& d) const {
  if (weights.size() == 0) return 0.0;
  double total = 0.0;
  for (const auto& f : features(s, a, x, d)) total += weights.get(f);
  return total;
}

std::string Model::save() const {
  std::string out = std::string(kModelHeader) + "\n";
  for (const auto& [k, v] : meta) out += "@meta " + k + "=" + v + "\n";
  for (const auto& t : templates.templates()) {
    out += "@template " + t.name + ":";
    for (std::size_t k = 0; k < t.atoms.size(); ++k)
      out += std::string(k ? "," : " ") + std::string(atomic_name(t.atoms[k]));
    out += "\n";
  }
  std::map<std::string, double> sorted(weights.weights().begin(),
                                       weights.weights().end());
  for (const auto& [f, w] : sorted) {
    if (w == 0.0) continue;
    out += f + "\t" + format_double(w) + "\n";
  }
  return out;
}

Model Model::parse(std::string_view text) {
  Model m;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || trim(line) != kModelHeader)
    throw ParseError("not a model file (missing '" + std::string(kModelHeader) +
                     "' header)");
  std::string template_text;
  bool saw_templates = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("@meta ", 0) == 0) {
      auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError("bad @meta line: " + line);
      m.meta[line.substr(6, eq - 6)] = line.substr(eq + 1);
    } else if (line.rfind("@template ", 0) == 0) {
      template_text += line.substr(10) + "\n";
      saw_templates = true;
    } else {
      auto tab = line.rfind('\t');
      if (tab == std::string::npos) throw ParseError("bad weight line: " + line);
      m.weights.set(line.substr(0, tab), parse_double(line.substr(tab + 1)));
    }
  }
  if (saw_templates) m.templates = FeatureTemplateSet::parse(template_text);
  return m;
}

void Model::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write model file '" + path + "'");
  out << save();
}

Model Model::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

FeatureVector derivation_features(const ParserState& s, const Sentence& x,
                                  const Domain& d, const Model& m) {
  FeatureVector fv;
  auto path = s.path();
  for (std::size_t k = 1; k < path.size(); ++k)
    fv.add(m.extract(*path[k - 1], path[k]->last, x, d));
  return fv;
}

}  // namespace tdparse
