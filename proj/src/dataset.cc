#include "tdparse/dataset.h"

#include <fstream>
#include <sstream>

namespace tdparse {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

}  // namespace

std::vector<Example> read_dataset(std::istream& in, const Domain& d) {
  std::vector<Example> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, '\t');
    const std::string where = "data line " + std::to_string(n) + ": ";
    if (fields.size() < 2 || fields.size() > 3)
      throw ParseError(where + "expected question<TAB>mr[<TAB>tags]");
    Sentence sentence{tokenize(fields[0]), {}};
    if (sentence.tokens.empty()) throw ParseError(where + "empty question");
    if (fields.size() == 3) {
      std::istringstream tags(fields[2]);
      std::string tag;
      while (tags >> tag) sentence.tags.push_back(tag);
      if (sentence.tags.size() != sentence.tokens.size())
        throw ParseError(where + "tag count does not match token count");
    }
    Expr gold = [&] {
      try {
        return d.parse_mr(fields[1]).expr;
      } catch (const TypeError& e) {
        throw TypeError(where + e.what());
      } catch (const ParseError& e) {
        throw ParseError(where + e.what());
      }
    }();
    Example ex{static_cast<int>(out.size()), fields[0], std::move(sentence),
               std::move(gold), fields[1]};
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<Example> read_dataset_file(const std::string& path, const Domain& d) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open data file '" + path + "'");
  return read_dataset(in, d);
}

}  // namespace tdparse
