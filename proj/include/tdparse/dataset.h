#ifndef TDPARSE_DATASET_H_
#define TDPARSE_DATASET_H_

// Question/meaning-representation pairs: one example per line,
// `question<TAB>mr[<TAB>space-separated POS tags]`, `#` comment lines.

#include <istream>
#include <string>
#include <vector>

#include "tdparse/lexicon.h"
#include "tdparse/state.h"

namespace tdparse {

struct Example {
  int id = 0;  // 0-based position in the file
  std::string question;
  Sentence sentence;
  Expr gold;
  std::string gold_text;  // as written in the file
};

// Throws ParseError/TypeError naming the offending line.
std::vector<Example> read_dataset(std::istream& in, const Domain& d);
std::vector<Example> read_dataset_file(const std::string& path, const Domain& d);

}  // namespace tdparse

#endif  // TDPARSE_DATASET_H_
