#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "skipstop/experiment.hpp"

namespace skipstop {

/// Minimal CSV sink; I/O failures throw with the file path.
class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path);
    void row(const std::vector<std::string>& fields);
    void close();

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

/// Fixed-format number: 10 significant digits, empty for NaN.
std::string format_number(double v);

std::vector<std::string> case_columns();
std::vector<std::string> case_row(const CaseResult& r);

void write_cases(const std::vector<CaseResult>& results, const std::filesystem::path& dir);
void write_summary(const SweepSummary& summary, const std::filesystem::path& dir);
void write_savings(const std::vector<CaseResult>& results, const std::filesystem::path& dir);
void write_gaps(const std::vector<CaseResult>& results, const std::filesystem::path& dir);

void write_profiles(const CaseResult& r, const std::filesystem::path& dir);
void write_errors(const CaseResult& r, const std::filesystem::path& dir);
void write_plan(const CaseResult& r, const std::filesystem::path& dir);
void write_trace(const CaseResult& r, const std::filesystem::path& dir);
void write_od_accounts(const std::vector<OdAccount>& rows, const std::filesystem::path& path);

/// Every per-case file for which the case carries data.
void write_case_files(const CaseResult& r, const std::filesystem::path& dir);

/// cases, summary, savings and gap tables plus per-case files.
void emit_reports(const std::vector<CaseResult>& results, const std::filesystem::path& dir);

} // namespace skipstop
