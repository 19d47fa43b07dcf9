#pragma once

#include <string>
#include <vector>

#include "rpmx/config.hpp"
#include "rpmx/dataset.hpp"

namespace rpmx {

struct DataSchema {
  std::string response = "y";
  std::vector<std::string> binary_columns;  // must hold only 0/1
  std::vector<DiscretizeRule> discretize;   // applied before type checks
};

struct LoadReport {
  int dropped_rows = 0;  // rows removed for containing an empty cell
};

// Reads a comma-separated file with a header row.  Rows with empty cells are
// dropped (counted in the report); non-numeric cells are an error.  Columns
// named in the discretize rules are replaced in place by one 1{x > cutoff}
// dummy per cutoff.  Columns listed as binary are checked cell by cell;
// unlisted columns are binary when they only contain 0/1.
Dataset load_dataset(const std::string& path, const DataSchema& schema,
                     LoadReport* report = nullptr);

// 17-significant-digit output so save/load round-trips bit-exactly.
void save_dataset(const std::string& path, const Dataset& data);

}  // namespace rpmx
