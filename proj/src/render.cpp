#include "gcs/render.hpp"

namespace gcs {

namespace {

template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::vector<std::string> render_event(const ClientEvent& event)
{
    return std::visit(
        overloaded{
            [](const event::Joined& e) -> std::vector<std::string> {
                return {"*** joined as " + e.self.str() + "; coordinator is " + e.coordinator.str()};
            },
            [](const event::PeerJoined& e) -> std::vector<std::string> {
                return {"*** " + e.id.str() + " joined from " + e.ip + ":" + std::to_string(e.port)};
            },
            [](const event::PeerLeft& e) -> std::vector<std::string> {
                return {"*** " + e.id.str() + " left (" + std::string(to_string(e.reason)) + ")"};
            },
            [](const event::NewCoordinator& e) -> std::vector<std::string> {
                return {"*** " + e.id.str() + " is now the coordinator"};
            },
            [](const event::Message& e) -> std::vector<std::string> {
                std::string line = "[" + e.ts.str() + "] " + e.from.str();
                if (e.kind == MessageKind::private_message) line += " (private)";
                return {line + ": " + e.body};
            },
            [](const event::Roster& e) -> std::vector<std::string> {
                if (e.entries.empty()) return {"*** no members"};
                std::vector<std::string> lines;
                for (const auto& m : e.entries)
                    lines.push_back("    " + m.id.str() + "  " + m.ip + "  " + std::to_string(m.port));
                return lines;
            },
            [](const event::Error& e) -> std::vector<std::string> {
                return {"!!! " + e.code + ": " + e.text};
            },
            [](const event::Disconnected& e) -> std::vector<std::string> {
                return {"*** disconnected: " + e.reason};
            },
        },
        event);
}

}  // namespace gcs
