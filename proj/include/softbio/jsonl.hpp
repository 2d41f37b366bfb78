#pragma once

#include "softbio/data_model.hpp"

#include <fstream>
#include <optional>
#include <string>

namespace softbio {

/// One parsed line of a line-delimited document.
struct JsonlRecord {
    json value;
    std::string source;
    int line = 0;

    std::string locus() const { return source + ":" + std::to_string(line); }
    [[noreturn]] void fail(const std::string& what) const;
    const json& require(const char* key) const;
};

/// Reads a versioned line-delimited document: a header object followed by
/// one record per line. Blank lines are skipped.
class JsonlReader {
public:
    explicit JsonlReader(const std::string& path);

    /// Reads the first record and checks its schema name and version.
    JsonlRecord header(const std::string& schema, int version = 1);
    std::optional<JsonlRecord> next();

private:
    std::ifstream in_;
    std::string path_;
    int line_ = 0;
};

/// One row of an attribute-scores file.
struct ScoreRecord {
    std::string sequence_id;
    int frame_index = 0;
    std::string candidate_id;
    AttributeFamily family = AttributeFamily::TorsoColor;
    std::vector<double> scores;
};

/// Rejects headers whose vocabulary hash or label order differ from `vocab`.
void validate_scores_header(const JsonlRecord& header, const AttributeVocabulary& vocab);
ScoreRecord read_score_record(const JsonlRecord& rec, const AttributeVocabulary& vocab);

json scores_header(const AttributeVocabulary& vocab, const std::string& sequence_id);

}  // namespace softbio
