#include "gcs/log.hpp"

#include <iostream>

namespace gcs {

std::string_view to_string(LogKind kind) noexcept
{
    switch (kind) {
    case LogKind::join: return "JOIN";
    case LogKind::leave: return "LEAVE";
    case LogKind::broadcast: return "BROADCAST";
    case LogKind::private_message: return "PRIVATE";
    case LogKind::details: return "DETAILS";
    case LogKind::coord_change: return "COORD_CHANGE";
    case LogKind::error: return "ERROR";
    case LogKind::ping_timeout: return "PING_TIMEOUT";
    case LogKind::bind: return "BIND";
    }
    return "ERROR";
}

std::string format_log_line(const LogEntry& entry)
{
    std::string line;
    line.reserve(entry.ts.str().size() + entry.detail.size() + 16);
    line.append("[").append(entry.ts.str()).append("] ").append(to_string(entry.kind));
    if (!entry.detail.empty()) line.append(" ").append(entry.detail);
    return line;
}

void StreamLogSink::append(const LogEntry& entry)
{
    std::lock_guard lock(mu_);
    out_ << format_log_line(entry) << '\n' << std::flush;
}

FileLogSink::FileLogSink(const std::filesystem::path& path, std::ostream& fallback,
                         std::ostream& warnings)
    : path_(path), fallback_(fallback), warnings_(warnings)
{
    file_.open(path, std::ios::out | std::ios::app);
    if (!file_) degrade("cannot open " + path.string());
}

FileLogSink::FileLogSink(const std::filesystem::path& path) : FileLogSink(path, std::cout, std::cerr) {}

void FileLogSink::degrade(const std::string& why)
{
    if (degraded_) return;
    degraded_ = true;
    warnings_ << "warning: log file unavailable (" << why << "); logging to standard output\n"
              << std::flush;
}

void FileLogSink::append(const LogEntry& entry)
{
    std::lock_guard lock(mu_);
    auto line = format_log_line(entry);
    if (!degraded_) {
        file_ << line << '\n' << std::flush;
        if (file_) return;
        degrade("write to " + path_.string() + " failed");
    }
    fallback_ << line << '\n' << std::flush;
}

bool FileLogSink::degraded() const
{
    std::lock_guard lock(mu_);
    return degraded_;
}

void MemoryLogSink::append(const LogEntry& entry)
{
    std::lock_guard lock(mu_);
    entries_.push_back(entry);
}

std::vector<std::string> MemoryLogSink::lines() const
{
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(format_log_line(e));
    return out;
}

std::vector<LogEntry> MemoryLogSink::entries() const
{
    std::lock_guard lock(mu_);
    return entries_;
}

}  // namespace gcs
