#include "legalstyle/ratings.hpp"

#include <set>
#include <sstream>
#include <tuple>

#include "legalstyle/data_paths.hpp"
#include "legalstyle/error.hpp"
#include "legalstyle/utf8.hpp"

namespace legalstyle {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(utf8::trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(utf8::trim(cur));
  return fields;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<HumanRating> parse_ratings_csv(const std::string& content, const std::string& where) {
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::size_t> columns;
  std::vector<HumanRating> out;
  std::set<std::tuple<std::string, std::string, Dimension>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (utf8::is_blank(line)) continue;
    const auto fields = split_csv_line(line);
    if (columns.empty()) {
      for (std::size_t i = 0; i < fields.size(); ++i) columns[fields[i]] = i;
      for (const char* need : {"doc_id", "rater_id", "dimension", "score"}) {
        if (!columns.contains(need)) throw Error(ErrorCode::Format, where + ": header lacks column '" + need + "'");
      }
      continue;
    }
    const auto at = [&](const char* name) -> const std::string& {
      const auto idx = columns.at(name);
      if (idx >= fields.size()) {
        throw Error(ErrorCode::Format, where + ":" + std::to_string(line_no) + ": missing field " + name);
      }
      return fields[idx];
    };
    HumanRating r;
    r.doc_id = at("doc_id");
    r.rater_id = at("rater_id");
    const auto dim = parse_dimension(at("dimension"));
    if (!dim) throw Error(ErrorCode::Format, where + ":" + std::to_string(line_no) + ": unknown dimension " + at("dimension"));
    r.dimension = *dim;
    try {
      std::size_t used = 0;
      r.score = std::stod(at("score"), &used);
      if (used != at("score").size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw Error(ErrorCode::Format, where + ":" + std::to_string(line_no) + ": score is not a number");
    }
    if (!(r.score >= 0.0 && r.score <= 10.0)) {
      throw Error(ErrorCode::Format, where + ":" + std::to_string(line_no) + ": score outside [0, 10]");
    }
    if (r.doc_id.empty() || r.rater_id.empty()) {
      throw Error(ErrorCode::Format, where + ":" + std::to_string(line_no) + ": empty doc_id or rater_id");
    }
    if (!seen.emplace(r.doc_id, r.rater_id, r.dimension).second) {
      throw Error(ErrorCode::Format, where + ":" + std::to_string(line_no) + ": duplicate rating");
    }
    out.push_back(std::move(r));
  }
  if (columns.empty()) throw Error(ErrorCode::Format, where + ": empty ratings file");
  return out;
}

std::vector<HumanRating> read_ratings_csv(const std::filesystem::path& path) {
  return parse_ratings_csv(read_file(path), path.string());
}

std::string ratings_to_csv(const std::vector<HumanRating>& ratings) {
  std::ostringstream out;
  out << "doc_id,rater_id,dimension,score\n";
  for (const auto& r : ratings) {
    out << csv_field(r.doc_id) << ',' << csv_field(r.rater_id) << ',' << to_string(r.dimension) << ',' << r.score
        << '\n';
  }
  return out.str();
}

std::map<std::string, std::map<std::string, double>> weighted_by_rater(const std::vector<HumanRating>& ratings,
                                                                       const DimensionWeights& weights) {
  std::map<std::string, std::map<std::string, std::pair<double, int>>> acc;
  for (const auto& r : ratings) {
    auto& cell = acc[r.rater_id][r.doc_id];
    cell.first += weights.weight(r.dimension) * r.score;
    cell.second += 1;
  }
  std::map<std::string, std::map<std::string, double>> out;
  for (const auto& [rater, docs] : acc) {
    for (const auto& [doc, cell] : docs) {
      if (cell.second == static_cast<int>(kDimensions.size())) out[rater][doc] = cell.first;
    }
  }
  return out;
}

std::map<std::string, double> weighted_human_scores(const std::vector<HumanRating>& ratings,
                                                    const DimensionWeights& weights) {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& [rater, docs] : weighted_by_rater(ratings, weights)) {
    for (const auto& [doc, score] : docs) {
      acc[doc].first += score;
      acc[doc].second += 1;
    }
  }
  std::map<std::string, double> out;
  for (const auto& [doc, cell] : acc) out[doc] = cell.first / cell.second;
  return out;
}

AnnotationMatrix annotation_matrix(const std::vector<HumanRating>& ratings, const DimensionWeights& weights) {
  const auto by_rater = weighted_by_rater(ratings, weights);
  std::set<std::string> docs;
  for (const auto& [_, d] : by_rater) {
    for (const auto& [doc, __] : d) docs.insert(doc);
  }
  AnnotationMatrix m;
  for (const auto& [_, d] : by_rater) {
    std::vector<std::optional<double>> row;
    for (const auto& doc : docs) {
      const auto it = d.find(doc);
      row.push_back(it == d.end() ? std::nullopt : std::optional<double>(it->second));
    }
    m.ratings.push_back(std::move(row));
  }
  return m;
}

}  // namespace legalstyle
