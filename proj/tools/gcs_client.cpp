// gcs-client: interactive terminal client.

#include <unistd.h>

#include <iostream>

#include <CLI11.hpp>

#include "gcs/client.hpp"

namespace {

std::optional<gcs::MemberId> prompt_for_id()
{
    for (;;) {
        std::cout << "member id: " << std::flush;
        // byte-wise so nothing after the id line is consumed from stdin
        std::string line;
        char c;
        ssize_t n;
        while ((n = ::read(STDIN_FILENO, &c, 1)) == 1 && c != '\n') line += c;
        if (n != 1 && line.empty()) return std::nullopt;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (auto id = gcs::MemberId::parse(line)) return id;
        std::cout << "ids are 1-" << gcs::MemberId::max_length << " characters of A-Z a-z 0-9 _ -\n";
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Group communication terminal client"};
    std::string host = "127.0.0.1";
    std::uint16_t port = 5000;
    std::string id_text;
    app.add_option("--host", host, "Server address")->capture_default_str();
    app.add_option("--port", port, "Server port")->capture_default_str();
    app.add_option("--id", id_text, "Member id to join as (prompted if omitted)");
    CLI11_PARSE(app, argc, argv);

    std::optional<gcs::MemberId> id;
    if (id_text.empty()) {
        id = prompt_for_id();
        if (!id) return gcs::exit_connection_error;
    } else if (!(id = gcs::MemberId::parse(id_text))) {
        std::cerr << "gcs-client: invalid id '" << id_text << "'\n";
        return 2;
    }
    return gcs::run_client(host, port, *id, STDIN_FILENO, std::cout, std::cerr);
}
