#pragma once

#include "autocbt/orchestrator.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace autocbt {

// One JSON object per record, keys in a fixed order, no trailing newline.
std::string record_to_json(const ConsultationRecord& rec);
// Throws Error{ParseError, MissingField}.
ConsultationRecord record_from_json(std::string_view line);

std::string serialize_records(const std::vector<ConsultationRecord>& records);
std::vector<ConsultationRecord> parse_records(std::string_view jsonl);
// Throws Error{Io} besides the parse errors.
std::vector<ConsultationRecord> load_records(const std::filesystem::path& path);
void write_records(const std::filesystem::path& path, const std::vector<ConsultationRecord>& records);

// Human-readable step listing, one line per session event:
//
//     1. draft      counsellor: ...
//     2. route      counsellor [UNICAST] -> strategy_sup
//
// The final lines give the termination reason and hop count.
std::string format_trace(const ConsultationRecord& rec);

// Truncates `path` and writes `text`. Throws Error{Io}.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace autocbt
