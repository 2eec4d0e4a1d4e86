#pragma once

#include <json.hpp>
#include <ostream>
#include <string>

namespace fsc::io {

/// One JSON object per line; every record has a "record" field naming its kind.
class RecordWriter {
 public:
  explicit RecordWriter(std::ostream& out) : out_(out) {}

  void write(const std::string& kind, nlohmann::ordered_json fields) {
    nlohmann::ordered_json rec;
    rec["record"] = kind;
    for (auto& [k, v] : fields.items()) rec[k] = v;
    out_ << rec.dump() << '\n';
  }

 private:
  std::ostream& out_;
};

}  // namespace fsc::io
