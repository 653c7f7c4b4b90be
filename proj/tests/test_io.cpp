#include "volrace/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

using namespace volrace;
using namespace std::chrono;

TEST_CASE("money formatting") {
    CHECK(io::money(2251.0) == "2251.00");
    CHECK(io::money(3.2) == "3.20");
    CHECK(io::money(Cents{-125}) == "-1.25");
    CHECK(io::money(Cents{5}) == "0.05");
    CHECK(io::money(Cents{-5}) == "-0.05");
    CHECK(io::number(std::nan("")) == "nan");
}

TEST_CASE("percentiles interpolate linearly") {
    const std::vector<double> v{4, 1, 3, 2, 5};
    const std::vector<double> p{0.0, 0.25, 0.5, 0.9, 1.0};
    const auto q = io::percentiles(v, p);
    CHECK(q[0] == 1.0);
    CHECK(q[1] == 2.0);
    CHECK(q[2] == 3.0);
    CHECK(q[3] == doctest::Approx(4.6));
    CHECK(q[4] == 5.0);
}

TEST_CASE("trade log folds the ledger into round trips") {
    const Timestamp t0{sys_days{year{2020} / 2 / 10}};
    TradeRecord open, hedge, close;
    open.timestamp = t0;
    open.trade_id = hedge.trade_id = close.trade_id = 1;
    open.action = Action::BuyToOpen;
    open.direction = hedge.direction = close.direction = Direction::LongVol;
    open.spread = 0.06;
    open.option_premium = 1000;
    hedge.timestamp = t0 + hours{1};
    hedge.action = Action::Rehedge;
    hedge.pnl_underlying = hedge.pnl_total = -1500;
    close.timestamp = t0 + hours{2};
    close.action = Action::SellToClose;
    close.spread = -0.01;
    close.option_premium = 1100;
    close.pnl_option = 10000;
    close.pnl_underlying = 500;
    close.pnl_total = 10500;
    std::ostringstream o;
    io::write_trade_log_csv(o, std::vector{open, hedge, close});
    std::istringstream lines(o.str());
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(header.rfind("trade_id,entry_time,exit_time,direction,entry_spread,exit_spread", 0) == 0);
    CHECK(row == "1,2020-02-10 00:00:00,2020-02-10 02:00:00,long-vol,0.06,-0.01,1000.00,1100.00,90.00,-10.00,100.00,0.00,0");
}

TEST_CASE("performance CSV prints n/a without losses") {
    io::PerformanceRow row;
    row.entry_threshold = 0.05;
    row.report.trades = 1;
    row.report.wins = 1;
    row.report.win_rate = 1.0;
    row.report.total_pnl = 100;
    row.report.pnl_per_trade = 100;
    std::ostringstream o;
    io::write_performance_csv(o, std::vector{row});
    CHECK(o.str().find(",n/a,") != std::string::npos);
    CHECK(o.str().find(",100.00,100.00,") != std::string::npos);
}

TEST_CASE("fit JSON") {
    FitResult f;
    f.kind = ModelKind::Garch;
    f.params = {1.36e-4, 0.11, 0.83, 0.0};
    f.tstats = {2.0, 3.0, std::nan("")};
    f.loglik = 1663.62;
    f.n = 953;
    const auto j = nlohmann::json::parse(io::fits_json(std::vector{f}));
    CHECK(j[0]["model"] == "GARCH");
    CHECK(j[0]["params"]["beta"].get<double>() == 0.83);
    CHECK(j[0]["tstats"]["beta"].is_null());
    CHECK(j[0]["unconditional_vol"].get<double>() == doctest::Approx(0.9096).epsilon(0.003));
}

TEST_CASE("write_file replaces the target atomically") {
    const auto dir = std::filesystem::temp_directory_path() / "volrace_io_test";
    std::filesystem::remove_all(dir);
    const auto path = dir / "sub" / "a.csv";
    io::write_file(path, [](std::ostream& o) { o << "x,y\n1,2\n"; });
    std::ifstream in(path);
    std::string all((std::istreambuf_iterator<char>(in)), {});
    CHECK(all == "x,y\n1,2\n");
    CHECK_FALSE(std::filesystem::exists(dir / "sub" / "a.csv.tmp"));
    std::filesystem::remove_all(dir);
}
