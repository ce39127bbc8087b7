#include "gcs/gateway.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace gcs {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

constexpr std::size_t max_line = 64 * 1024;

constexpr const char* fallback_page = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>GCS gateway</title></head>
<body>
<h1>GCS gateway</h1>
<p>The console assets are not installed. Start the gateway with
<code>--assets &lt;dir&gt;</code> pointing at the console build, or connect a
WebSocket client to <code>/ws</code>: every text message is one protocol line.</p>
</body></html>
)";

// One browser connection and its upstream TCP connection. Everything runs on
// the gateway's single io_context thread, so no locking is needed; each
// direction is one ordered read-then-write pump.
class Bridge : public std::enable_shared_from_this<Bridge> {
public:
    Bridge(tcp::socket socket, const GatewayConfig& config, std::set<std::shared_ptr<Bridge>>& live)
        : ws_(std::move(socket)), upstream_(ws_.get_executor()), resolver_(ws_.get_executor()), config_(config),
          live_(live)
    {
    }

    void run(http::request<http::string_body> req)
    {
        live_.insert(shared_from_this());
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.read_message_max(max_line);
        ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
            if (ec) return self->finish();
            self->dial();
        });
    }

    void shutdown()
    {
        beast::error_code ec;
        upstream_.shutdown(tcp::socket::shutdown_both, ec);
        upstream_.close(ec);
        beast::get_lowest_layer(ws_).close();
    }

private:
    void dial()
    {
        resolver_.async_resolve(
            config_.server_host, std::to_string(config_.server_port),
            [self = shared_from_this()](beast::error_code ec, tcp::resolver::results_type results) {
                if (ec) return self->close_ws(close_upstream_unreachable, websocket::close_code::try_again_later);
                asio::async_connect(self->upstream_, results, [self](beast::error_code ec, const tcp::endpoint&) {
                    if (ec) return self->close_ws(close_upstream_unreachable, websocket::close_code::try_again_later);
                    self->ws_.text(true);
                    self->read_ws();
                    self->read_upstream();
                });
            });
    }

    // browser -> server
    void read_ws()
    {
        ws_.async_read(ws_in_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                // browser went away (or closed); take the upstream down with it
                self->ws_open_ = false;
                beast::error_code ignored;
                self->upstream_.shutdown(tcp::socket::shutdown_both, ignored);
                self->upstream_.close(ignored);
                return self->finish();
            }
            auto text = beast::buffers_to_string(self->ws_in_.data());
            self->ws_in_.consume(self->ws_in_.size());
            if (text.find_first_of("\r\n") != std::string::npos)
                return self->close_ws(close_bad_message, websocket::close_code::policy_error);
            self->up_out_ = std::move(text) + "\n";
            asio::async_write(self->upstream_, asio::buffer(self->up_out_),
                              [self](beast::error_code ec, std::size_t) {
                                  if (ec) return self->close_ws(close_upstream_closed, websocket::close_code::going_away);
                                  self->read_ws();
                              });
        });
    }

    // server -> browser
    void read_upstream()
    {
        asio::async_read_until(
            upstream_, asio::dynamic_buffer(up_in_, max_line + 1), '\n',
            [self = shared_from_this()](beast::error_code ec, std::size_t n) {
                if (ec) return self->close_ws(close_upstream_closed, websocket::close_code::going_away);
                self->ws_out_ = self->up_in_.substr(0, n - 1);
                self->up_in_.erase(0, n);
                if (!self->ws_out_.empty() && self->ws_out_.back() == '\r') self->ws_out_.pop_back();
                self->writing_ = true;
                self->ws_.async_write(asio::buffer(self->ws_out_), [self](beast::error_code ec, std::size_t) {
                    self->writing_ = false;
                    if (ec) {
                        self->ws_open_ = false;
                        return self->finish();
                    }
                    if (self->pending_close_) return self->close_ws(*self->pending_close_, self->pending_code_);
                    self->read_upstream();
                });
            });
    }

    void close_ws(const char* reason, websocket::close_code code)
    {
        beast::error_code ignored;
        upstream_.shutdown(tcp::socket::shutdown_both, ignored);
        upstream_.close(ignored);
        if (!ws_open_ || closing_) return finish();
        if (writing_) {
            // a close frame may not overlap a message write; send it after
            pending_close_ = reason;
            pending_code_ = code;
            return;
        }
        closing_ = true;
        ws_.async_close(websocket::close_reason(code, reason),
                        [self = shared_from_this()](beast::error_code) { self->finish(); });
    }

    void finish() { live_.erase(shared_from_this()); }

    websocket::stream<beast::tcp_stream> ws_;
    tcp::socket upstream_;
    tcp::resolver resolver_;
    const GatewayConfig& config_;
    std::set<std::shared_ptr<Bridge>>& live_;

    beast::flat_buffer ws_in_;
    std::string up_out_, up_in_, ws_out_;
    bool ws_open_ = true, writing_ = false, closing_ = false;
    std::optional<const char*> pending_close_;
    websocket::close_code pending_code_ = websocket::close_code::normal;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket socket, const GatewayConfig& config, std::set<std::shared_ptr<Bridge>>& bridges)
        : stream_(std::move(socket)), config_(config), bridges_(bridges)
    {
    }

    void read()
    {
        req_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return;
            self->handle();
        });
    }

private:
    void handle()
    {
        if (websocket::is_upgrade(req_)) {
            if (req_.target() == "/ws") {
                stream_.expires_never();
                std::make_shared<Bridge>(stream_.release_socket(), config_, bridges_)->run(std::move(req_));
                return;
            }
            return respond(http::status::not_found, "text/plain", "websocket endpoint is /ws\n");
        }
        if (req_.method() != http::verb::get && req_.method() != http::verb::head)
            return respond(http::status::method_not_allowed, "text/plain", "GET only\n");

        const std::string target(req_.target());
        if (config_.assets_dir) {
            if (auto path = asset_path(*config_.assets_dir, target)) {
                std::ifstream in(*path, std::ios::binary);
                if (in) {
                    std::ostringstream body;
                    body << in.rdbuf();
                    return respond(http::status::ok, mime_type(*path), body.str());
                }
            }
        }
        auto path_only = target.substr(0, target.find('?'));
        if (path_only == "/" || path_only == "/index.html")
            return respond(http::status::ok, "text/html; charset=utf-8", fallback_page);
        respond(http::status::not_found, "text/plain", "not found\n");
    }

    void respond(http::status status, std::string_view type, std::string body)
    {
        auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
        res->set(http::field::server, "gcs-gateway");
        res->set(http::field::content_type, beast::string_view(type.data(), type.size()));
        res->keep_alive(req_.keep_alive());
        const auto length = body.size();
        res->body() = req_.method() == http::verb::head ? std::string() : std::move(body);
        res->prepare_payload();
        if (req_.method() == http::verb::head) res->content_length(length);
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
            if (ec || !res->keep_alive()) {
                beast::error_code ignored;
                self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                return;
            }
            self->read();
        });
    }

    beast::tcp_stream stream_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
    const GatewayConfig& config_;
    std::set<std::shared_ptr<Bridge>>& bridges_;
};

}  // namespace

struct Gateway::Impl {
    GatewayConfig config;
    asio::io_context ioc{1};
    tcp::acceptor acceptor{ioc};
    std::set<std::shared_ptr<Bridge>> bridges;
    std::thread worker;

    std::mutex mu;
    bool stopped = false;

    void accept()
    {
        acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
            if (ec == asio::error::operation_aborted || !acceptor.is_open()) return;
            if (!ec) std::make_shared<HttpSession>(std::move(socket), config, bridges)->read();
            accept();
        });
    }
};

std::unique_ptr<Gateway> Gateway::start(const GatewayConfig& config)
{
    auto impl = std::make_unique<Impl>();
    impl->config = config;

    const tcp::endpoint endpoint(asio::ip::make_address(config.listen_ip), config.listen_port);
    impl->acceptor.open(endpoint.protocol());
    impl->acceptor.set_option(asio::socket_base::reuse_address(true));
    impl->acceptor.bind(endpoint);
    impl->acceptor.listen();

    impl->accept();
    auto* p = impl.get();
    p->worker = std::thread([p] { p->ioc.run(); });
    return std::unique_ptr<Gateway>(new Gateway(std::move(impl)));
}

Gateway::Gateway(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}

Gateway::~Gateway() { stop(); }

std::uint16_t Gateway::port() const noexcept { return impl_->acceptor.local_endpoint().port(); }

void Gateway::stop()
{
    {
        std::lock_guard lock(impl_->mu);
        if (impl_->stopped) return;
        impl_->stopped = true;
    }
    asio::post(impl_->ioc, [p = impl_.get()] {
        beast::error_code ignored;
        p->acceptor.close(ignored);
        auto bridges = p->bridges;
        for (const auto& b : bridges) b->shutdown();
    });
    // let the shutdowns flush, then stop whatever is left
    asio::post(impl_->ioc, [p = impl_.get()] { p->ioc.stop(); });
    if (impl_->worker.joinable()) impl_->worker.join();
    impl_->bridges.clear();
}

std::string_view mime_type(const std::filesystem::path& path)
{
    const auto ext = path.extension().string();
    if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
    if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
    if (ext == ".css") return "text/css; charset=utf-8";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    if (ext == ".ico") return "image/x-icon";
    if (ext == ".txt") return "text/plain; charset=utf-8";
    return "application/octet-stream";
}

std::optional<std::filesystem::path> asset_path(const std::filesystem::path& root, std::string_view target)
{
    target = target.substr(0, target.find_first_of("?#"));
    if (target.empty() || target.front() != '/') return std::nullopt;
    std::filesystem::path rel(std::string(target.substr(1)));
    for (const auto& part : rel)
        if (part == "..") return std::nullopt;
    if (rel.empty() || target.back() == '/') rel /= "index.html";
    return root / rel;
}

}  // namespace gcs
