#pragma once

// Server interaction log. One line per entry:
//
//     [2024-03-01 10:00:00] BROADCAST from=alice len=5

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "gcs/protocol.hpp"

namespace gcs {

enum class LogKind { join, leave, broadcast, private_message, details, coord_change, error, ping_timeout, bind };

/// Upper-case tag used in log lines (JOIN, LEAVE, BROADCAST, PRIVATE, ...).
std::string_view to_string(LogKind kind) noexcept;

struct LogEntry {
    Timestamp ts;
    LogKind kind;
    std::string detail;

    friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

std::string format_log_line(const LogEntry& entry);

class LogSink {
public:
    virtual ~LogSink() = default;
    virtual void append(const LogEntry& entry) = 0;
};

inline void append_log(LogSink& sink, const LogEntry& entry) { sink.append(entry); }

/// Writes to a caller-owned stream (standard output in production).
class StreamLogSink : public LogSink {
public:
    explicit StreamLogSink(std::ostream& out) : out_(out) {}
    void append(const LogEntry& entry) override;

private:
    std::mutex mu_;
    std::ostream& out_;
};

/// Appends to a file. If the file cannot be opened or a write fails, logging
/// continues on `fallback` and a single warning goes to `warnings`.
class FileLogSink : public LogSink {
public:
    FileLogSink(const std::filesystem::path& path, std::ostream& fallback, std::ostream& warnings);
    explicit FileLogSink(const std::filesystem::path& path);

    void append(const LogEntry& entry) override;
    bool degraded() const;

private:
    void degrade(const std::string& why);

    mutable std::mutex mu_;
    std::filesystem::path path_;
    std::ofstream file_;
    std::ostream& fallback_;
    std::ostream& warnings_;
    bool degraded_ = false;
};

/// Keeps formatted lines in memory; used by the simulator and tests.
class MemoryLogSink : public LogSink {
public:
    void append(const LogEntry& entry) override;

    std::vector<std::string> lines() const;
    std::vector<LogEntry> entries() const;

private:
    mutable std::mutex mu_;
    std::vector<LogEntry> entries_;
};

}  // namespace gcs
