#!/usr/bin/env python3
"""Builds the bundled mini-benchmark under data/mini.

Two SQLite databases, 20 BIRD-style instances with evidence, and two stub
tables for the table-driven provider:

  stubs/knowledge_stub.json  question -> generated knowledge
  stubs/sql_stub.json        (question, knowledge) -> SQL completion

Every instance carries the SQL the stub answers with gold knowledge, with the
generated knowledge and without knowledge. Before writing anything the script
executes all of them and checks the outcome each instance was designed for.

Usage: tools/make_mini_benchmark.py [output_dir]
"""

import json
import math
import os
import sqlite3
import sys

FRPM = [
    # CDSCode, County Name, School Name, Educational Option Type, Enrollment, Free Meal Count
    ("01100170109835", "Alameda", "FAME Public Charter", "Traditional", 1087, 565),
    ("01100170112607", "Alameda", "Envision Academy", "Traditional", 395, 186),
    ("01316170131763", "Alameda", "California School for the Deaf", "Traditional", 327, 200),
    ("01611190106401", "Alameda", "Alternatives in Action", "Continuation School", 142, 99),
    ("10621096005415", "Fresno", "Cambridge Continuation", "Continuation School", 173, 150),
    ("10621176109469", "Fresno", "Fresno Academy", "Traditional", 650, 455),
    ("15635290118471", "Kern", "Kern Valley Continuation", "Continuation School", 88, 40),
    ("15635296010524", "Kern", "Bakersfield High", "Traditional", 2900, 1450),
    ("19647330000000", "Los Angeles", "Sunrise Continuation", "Continuation School", 120, 30),
    ("19647330100000", "Los Angeles", "Downtown Magnet", "Magnet", 800, 200),
    ("37683380000000", "San Diego", "Harbor Continuation", "Continuation School", 60, 45),
    ("37683380000001", "San Diego", "Pacific Opportunity", "Opportunity School", 40, None),
]

SCHOOLS = [
    # CDSCode, School, City, EdOpsCode, Charter, OpenDate
    ("01100170109835", "FAME Public Charter", "Oakland", "TRAD", 1, "2012-08-15"),
    ("01100170112607", "Envision Academy", "Oakland", "TRAD", 1, "2008-09-02"),
    ("01316170131763", "California School for the Deaf", "Fremont", "SPECON", 0, "1980-07-01"),
    ("01611190106401", "Alternatives in Action", "Oakland", "C", 0, "1999-08-20"),
    ("10621096005415", "Cambridge Continuation", "Fresno", "C", 0, "1985-09-01"),
    ("10621176109469", "Fresno Academy", "Fresno", "TRAD", 0, "2015-08-12"),
    ("15635290118471", "Kern Valley Continuation", "Lake Isabella", "C", 0, "1990-09-05"),
    ("15635296010524", "Bakersfield High", "Bakersfield", "TRAD", 0, "1975-09-03"),
    ("19647330000000", "Sunrise Continuation", "Los Angeles", "C", 0, "2001-08-28"),
    ("19647330100000", "Downtown Magnet", "Los Angeles", "MAG", 0, "1995-09-06"),
    ("37683380000000", "Harbor Continuation", "San Diego", "C", 1, "2010-08-30"),
    ("37683380000001", "Pacific Opportunity", "San Diego", "OPP", 0, "2018-08-20"),
]

AIRPORTS = [
    ("JFK", "John F Kennedy International", "New York", "NY"),
    ("LGA", "LaGuardia", "New York", "NY"),
    ("LAX", "Los Angeles International", "Los Angeles", "CA"),
    ("SFO", "San Francisco International", "San Francisco", "CA"),
    ("ORD", "O'Hare International", "Chicago", "IL"),
    ("ATL", "Hartsfield-Jackson Atlanta International", "Atlanta", "GA"),
    ("SEA", "Seattle-Tacoma International", "Seattle", "WA"),
]

FLIGHTS = [
    # id, carrier, origin, dest, dep_delay, distance, cancelled
    (1, "AA", "JFK", "LAX", 5, 2475, 0),
    (2, "AA", "LAX", "JFK", -3, 2475, 0),
    (3, "DL", "ATL", "SEA", 45, 2182, 0),
    (4, "DL", "SEA", "ATL", 0, 2182, 0),
    (5, "UA", "SFO", "ORD", 12, 1846, 0),
    (6, "UA", "ORD", "SFO", 80, 1846, 0),
    (7, "WN", "LAX", "SFO", 7, 337, 0),
    (8, "WN", "SFO", "LAX", None, 337, 1),
    (9, "B6", "JFK", "SFO", 150, 2586, 0),
    (10, "B6", "SFO", "JFK", 20, 2586, 0),
    (11, "AA", "ORD", "LGA", 33, 733, 0),
    (12, "AA", "LGA", "ORD", -5, 733, 0),
    (13, "DL", "JFK", "ATL", None, 760, 1),
    (14, "DL", "ATL", "JFK", 2, 760, 0),
    (15, "UA", "SEA", "SFO", 15, 679, 0),
    (16, "UA", "SFO", "SEA", None, 679, 1),
    (17, "WN", "ATL", "ORD", 9, 606, 0),
    (18, "WN", "ORD", "ATL", 0, 606, 0),
    (19, "AS", "SEA", "LAX", 25, 954, 0),
    (20, "AS", "LAX", "SEA", 95, 954, 0),
]

RATE = "`Free Meal Count (Ages 5-17)` / `Enrollment (Ages 5-17)`"

# Each instance: the gold SQL, the evidence (gold knowledge), the knowledge the
# stub "generates", and the stub's SQL with gold knowledge, with generated
# knowledge and without knowledge. `expect` is what the instance exercises:
#   influence  baseline/assisted flip category in evaluation
#   db         execution feedback emits a pair
#   sql        contribution feedback emits a pair
#   quarantine the gold-knowledge prediction does not execute
INSTANCES = [
    dict(
        id=1, db="schools", difficulty="challenging",
        question="What are the lowest three eligible free rates for students aged 5-17 in "
        "continuation schools?",
        sql=f"SELECT {RATE} FROM frpm WHERE `Educational Option Type` = 'Continuation School' "
        f"AND {RATE} IS NOT NULL ORDER BY {RATE} ASC LIMIT 3",
        evidence=f"Eligible free rates for students aged 5-17 = {RATE}.",
        gen="Continuation schools refer to EdOpsCode = 'C', lowest three eligible free rate "
        "refer to MIN(`Percent (%) Eligible Free (Ages 5-17)`).",
        sql_gold_k=None,  # same as gold SQL
        sql_gen_k=f"SELECT MIN({RATE}) FROM frpm WHERE `Educational Option Type` = "
        "'Continuation School'",
        sql_base=f"SELECT {RATE} FROM frpm ORDER BY 1 ASC LIMIT 3",
        expect=dict(influence="inoperative", db=True, sql=True),
    ),
    dict(
        id=2, db="schools", difficulty="simple",
        question="How many schools are located in the city of Fresno?",
        sql="SELECT COUNT(*) FROM schools WHERE City = 'Fresno'",
        evidence="located in the city of Fresno refers to City = 'Fresno'",
        gen=None,  # same as evidence
        sql_gold_k=None, sql_gen_k=None,
        sql_base="SELECT COUNT(*) FROM schools WHERE City = 'Fresno'",
        expect=dict(influence="sustainable"),
    ),
    dict(
        id=3, db="schools", difficulty="simple",
        question="What is the total enrollment of students aged 5-17 in Alameda county?",
        sql="SELECT SUM(`Enrollment (Ages 5-17)`) FROM frpm WHERE `County Name` = 'Alameda'",
        evidence="Alameda refers to `County Name` = 'Alameda'; total enrollment refers to "
        "SUM(`Enrollment (Ages 5-17)`)",
        gen="Alameda refers to `County Name` = 'Alameda'",
        sql_gold_k=None, sql_gen_k=None,
        sql_base="SELECT SUM(`Enrollment (Ages 5-17)`) FROM frpm",
        expect=dict(influence="assistance"),
    ),
    dict(
        id=4, db="schools", difficulty="moderate",
        question="Which city has the charter school with the most students aged 5-17?",
        sql="SELECT T2.City FROM frpm AS T1 JOIN schools AS T2 ON T1.CDSCode = T2.CDSCode "
        "WHERE T2.Charter = 1 ORDER BY T1.`Enrollment (Ages 5-17)` DESC LIMIT 1",
        evidence="charter school refers to Charter = 1; most students refers to "
        "MAX(`Enrollment (Ages 5-17)`)",
        gen="charter school refers to Charter = 0",
        sql_gold_k=None,
        sql_gen_k="SELECT T2.City FROM frpm AS T1 JOIN schools AS T2 ON T1.CDSCode = T2.CDSCode "
        "WHERE T2.Charter = 0 ORDER BY T1.`Enrollment (Ages 5-17)` DESC LIMIT 1",
        sql_base="select T2.City from frpm as T1 join schools as T2 on T1.CDSCode = T2.CDSCode "
        "where T2.Charter = 1 order by T1.`Enrollment (Ages 5-17)` desc limit 1",
        expect=dict(influence="misleading", db=True),
    ),
    dict(
        id=5, db="schools", difficulty="simple",
        question="What is the name of the school with CDSCode 10621096005415?",
        sql="SELECT School FROM schools WHERE CDSCode = '10621096005415'",
        evidence="CDSCode 10621096005415 refers to CDSCode = '10621096005415'",
        gen=None, sql_gold_k=None, sql_gen_k=None,
        sql_base="SELECT School FROM schools WHERE CDSCode = '10621096005415'",
        expect=dict(influence="sustainable"),
    ),
    dict(
        id=6, db="schools", difficulty="moderate",
        question="How many continuation schools are there in Los Angeles county?",
        sql="SELECT COUNT(*) FROM frpm WHERE `County Name` = 'Los Angeles' AND "
        "`Educational Option Type` = 'Continuation School'",
        evidence="Los Angeles county refers to `County Name` = 'Los Angeles'; continuation "
        "schools refers to `Educational Option Type` = 'Continuation School'",
        gen="Continuation schools refer to EdOpsCode = 'C'",
        sql_gold_k=None,
        sql_gen_k="SELECT COUNT(*) FROM frpm AS T1 JOIN schools AS T2 ON T1.CDSCode = T2.CDSCode "
        "WHERE T1.`County Name` = 'Los Angeles' AND T2.EdOpsCode = 'C'",
        sql_base="SELECT COUNT(*) FROM frpm WHERE `County Name` = 'Los Angeles'",
        expect=dict(influence="assistance", sql=True),
    ),
    dict(
        id=7, db="schools", difficulty="challenging",
        question="What is the free meal rate of the most recently opened school in Alameda "
        "county?",
        sql="SELECT T1.`Free Meal Count (Ages 5-17)` / T1.`Enrollment (Ages 5-17)` FROM frpm AS T1 "
        "JOIN schools AS T2 ON T1.CDSCode = T2.CDSCode WHERE T1.`County Name` = 'Alameda' "
        "ORDER BY T2.OpenDate DESC LIMIT 1",
        evidence=f"free meal rate = {RATE}; most recently opened refers to MAX(OpenDate)",
        gen=None, sql_gold_k=None, sql_gen_k=None,
        sql_base=f"SELECT MAX({RATE}) FROM frpm WHERE `County Name` = 'Alameda'",
        expect=dict(influence="assistance"),
    ),
    dict(
        id=8, db="schools", difficulty="simple",
        question="List the names of schools in San Diego county.",
        sql="SELECT `School Name` FROM frpm WHERE `County Name` = 'San Diego'",
        evidence="San Diego refers to `County Name` = 'San Diego'",
        gen="San Diego refers to `County Name` = 'San Diego'.",
        sql_gold_k=None,
        sql_gen_k="SELECT `School Name` FROM frpm WHERE `County Name` = 'San Diego' "
        "ORDER BY `School Name`",
        sql_base="SELECT `School Name` FROM frpm WHERE `County Name` = 'San Diego'",
        expect=dict(influence="sustainable"),
    ),
    dict(
        id=9, db="schools", difficulty="moderate",
        question="What is the average enrollment of students aged 5-17 in traditional schools?",
        sql="SELECT AVG(`Enrollment (Ages 5-17)`) FROM frpm WHERE "
        "`Educational Option Type` = 'Traditional'",
        evidence="traditional schools refers to `Educational Option Type` = 'Traditional'; "
        "average enrollment refers to AVG(`Enrollment (Ages 5-17)`)",
        gen="traditional schools refers to `Educational Option Type` = 'Traditional'; average "
        "enrollment refers to SUM(`Enrollment (Ages 5-17)`) / COUNT(CDSCode)",
        sql_gold_k=None,
        sql_gen_k="SELECT SUM(`Enrollment (Ages 5-17)`) / COUNT(CDSCode) FROM frpm WHERE "
        "`Educational Option Type` = 'Traditional'",
        sql_base="SELECT AVG(`Enrollment (Ages 5-17)`) FROM frpm",
        expect=dict(influence="assistance", sql=True),
    ),
    dict(
        id=10, db="schools", difficulty="challenging",
        question="Which county has the highest total free meal count for students aged 5-17?",
        sql="SELECT `County Name` FROM frpm GROUP BY `County Name` ORDER BY "
        "SUM(`Free Meal Count (Ages 5-17)`) DESC LIMIT 1",
        evidence="highest total free meal count refers to "
        "MAX(SUM(`Free Meal Count (Ages 5-17)`))",
        gen="total free meal count refers to SUM(`Free Meal Count (Ages 5-17)`)",
        sql_gold_k="SELECT `County Name` FROM frpm GROUP BY `County Name` HAVING "
        "SUM(`Free Meal Count (Ages 5-17)`) = MAX(SUM(`Free Meal Count (Ages 5-17)`))",
        sql_gen_k="SELECT `County Name` FROM frpm GROUP BY `County Name` ORDER BY "
        "SUM(`Free Meal Count (Ages 5-17)`) DESC LIMIT 1",
        sql_base="SELECT `County Name` FROM frpm ORDER BY `Free Meal Count (Ages 5-17)` DESC "
        "LIMIT 1",
        expect=dict(influence="sustainable", quarantine=True),
    ),
    dict(
        id=11, db="flights", difficulty="simple",
        question="How many flights were cancelled?",
        sql="SELECT COUNT(*) FROM flights WHERE cancelled = 1",
        evidence="cancelled refers to cancelled = 1",
        gen=None, sql_gold_k=None, sql_gen_k=None,
        sql_base="SELECT COUNT(*) FROM flights WHERE cancelled = 1",
        expect=dict(influence="sustainable"),
    ),
    dict(
        id=12, db="flights", difficulty="simple",
        question="List the names of airports located in New York.",
        sql="SELECT name FROM airports WHERE city = 'New York'",
        evidence="located in New York refers to city = 'New York'",
        gen="New York refers to state = 'NY'",
        sql_gold_k=None,
        sql_gen_k="SELECT name FROM airports WHERE state = 'NY'",
        sql_base="SELECT code FROM airports WHERE city = 'New York'",
        expect=dict(influence="assistance", sql=True),
    ),
    dict(
        id=13, db="flights", difficulty="moderate",
        question="What is the average departure delay of carrier DL?",
        sql="SELECT AVG(dep_delay) FROM flights WHERE carrier = 'DL'",
        evidence="average departure delay refers to AVG(dep_delay); carrier DL refers to "
        "carrier = 'DL'",
        gen="average departure delay = SUM(dep_delay) / COUNT(id)",
        sql_gold_k=None,
        sql_gen_k="SELECT SUM(dep_delay) / COUNT(id) FROM flights WHERE carrier = 'DL'",
        sql_base="SELECT AVG(dep_delay) FROM flights",
        expect=dict(influence="inoperative", db=True, sql=True),
    ),
    dict(
        id=14, db="flights", difficulty="moderate",
        question="Which carriers fly from JFK to airports in California?",
        sql="SELECT DISTINCT T1.carrier FROM flights AS T1 JOIN airports AS T2 ON "
        "T1.dest = T2.code WHERE T1.origin = 'JFK' AND T2.state = 'CA'",
        evidence="from JFK refers to origin = 'JFK'; destination in California refers to "
        "state = 'CA'",
        gen=None, sql_gold_k=None, sql_gen_k=None,
        sql_base="SELECT DISTINCT carrier FROM flights WHERE origin = 'JFK'",
        expect=dict(influence="assistance"),
    ),
    dict(
        id=15, db="flights", difficulty="challenging",
        question="Which flight had the longest distance among flights that were not cancelled "
        "and departed on time?",
        sql="SELECT id FROM flights WHERE cancelled = 0 AND dep_delay <= 0 ORDER BY distance "
        "DESC LIMIT 1",
        evidence="not cancelled refers to cancelled = 0; departed on time refers to "
        "dep_delay <= 0; longest distance refers to MAX(distance)",
        gen="departed on time refers to dep_delay = 0",
        sql_gold_k=None,
        sql_gen_k="SELECT id FROM flights WHERE cancelled = 0 AND dep_delay = 0 ORDER BY "
        "distance DESC LIMIT 1",
        sql_base="SELECT id FROM flights WHERE cancelled = 0 ORDER BY distance DESC LIMIT 1",
        expect=dict(influence="inoperative", db=True),
    ),
    dict(
        id=16, db="flights", difficulty="simple",
        question="How many airports are in California?",
        sql="SELECT COUNT(*) FROM airports WHERE state = 'CA'",
        evidence="California refers to state = 'CA'",
        gen=None, sql_gold_k=None, sql_gen_k=None,
        sql_base="SELECT COUNT(*) FROM airports WHERE state = 'CA'",
        expect=dict(influence="sustainable"),
    ),
    dict(
        id=17, db="flights", difficulty="moderate",
        question="Which carrier operates the most flights departing from SFO?",
        sql="SELECT carrier FROM flights WHERE origin = 'SFO' GROUP BY carrier ORDER BY "
        "COUNT(id) DESC LIMIT 1",
        evidence="departing from SFO refers to origin = 'SFO'; most flights refers to "
        "MAX(COUNT(id))",
        gen="departing from SFO refers to origin = 'SFO'",
        sql_gold_k=None, sql_gen_k=None,
        sql_base="SELECT carrier, COUNT(id) FROM flights WHERE origin = 'SFO' GROUP BY carrier "
        "ORDER BY COUNT(id) DESC LIMIT 1",
        expect=dict(influence="assistance"),
    ),
    dict(
        id=18, db="flights", difficulty="challenging",
        question="What percentage of AA flights departed more than 30 minutes late?",
        sql="SELECT CAST(SUM(CASE WHEN dep_delay > 30 THEN 1 ELSE 0 END) AS REAL) * 100 / "
        "COUNT(id) FROM flights WHERE carrier = 'AA'",
        evidence="percentage = DIVIDE(SUM(dep_delay > 30), COUNT(id)) * 100; AA refers to "
        "carrier = 'AA'",
        gen=None, sql_gold_k=None, sql_gen_k=None,
        sql_base="SELECT 100.0 * SUM(dep_delay > 30) / COUNT(*) FROM flights WHERE carrier = 'AA'",
        expect=dict(influence="sustainable"),
    ),
    dict(
        id=19, db="flights", difficulty=None,
        question="What is the destination city of flight 9?",
        sql="SELECT T2.city FROM flights AS T1 JOIN airports AS T2 ON T1.dest = T2.code "
        "WHERE T1.id = 9",
        evidence="flight 9 refers to id = 9",
        gen="flight 9 refers to id = 9; destination city refers to T2.city",
        sql_gold_k=None, sql_gen_k=None,
        sql_base="SELECT city FROM airports WHERE code = (SELECT dest FROM flights WHERE id = 9)",
        expect=dict(influence="sustainable"),
    ),
    dict(
        id=20, db="flights", difficulty="simple",
        question="How many flights departed from Seattle?",
        sql="SELECT COUNT(*) FROM flights AS T1 JOIN airports AS T2 ON T1.origin = T2.code "
        "WHERE T2.city = 'Seattle'",
        evidence="Seattle refers to city = 'Seattle'",
        gen="Seattle refers to origin = 'SEA'",
        sql_gold_k=None,
        sql_gen_k="SELECT COUNT(*) FROM flights WHERE origin = 'SEA'",
        sql_base="SELECT COUNT(*) FROM flights WHERE dest = 'SEA'",
        expect=dict(influence="sustainable", sql=True),
    ),
]


def build_schools(path):
    con = sqlite3.connect(path)
    con.executescript(
        """
        CREATE TABLE frpm (
          CDSCode TEXT PRIMARY KEY,
          "County Name" TEXT,
          "School Name" TEXT,
          "Educational Option Type" TEXT,
          "Enrollment (Ages 5-17)" REAL,
          "Free Meal Count (Ages 5-17)" REAL
        );
        CREATE TABLE schools (
          CDSCode TEXT PRIMARY KEY,
          School TEXT,
          City TEXT,
          EdOpsCode TEXT,
          Charter INTEGER,
          OpenDate TEXT
        );
        """
    )
    con.executemany("INSERT INTO frpm VALUES (?, ?, ?, ?, ?, ?)", FRPM)
    con.executemany("INSERT INTO schools VALUES (?, ?, ?, ?, ?, ?)", SCHOOLS)
    con.commit()
    con.close()


def build_flights(path):
    con = sqlite3.connect(path)
    con.executescript(
        """
        CREATE TABLE airports (
          code TEXT PRIMARY KEY,
          name TEXT,
          city TEXT,
          state TEXT
        );
        CREATE TABLE flights (
          id INTEGER PRIMARY KEY,
          carrier TEXT,
          origin TEXT,
          dest TEXT,
          dep_delay INTEGER,
          distance INTEGER,
          cancelled INTEGER
        );
        """
    )
    con.executemany("INSERT INTO airports VALUES (?, ?, ?, ?)", AIRPORTS)
    con.executemany("INSERT INTO flights VALUES (?, ?, ?, ?, ?, ?, ?)", FLIGHTS)
    con.commit()
    con.close()


def run(con, sql):
    try:
        return con.execute(sql).fetchall()
    except sqlite3.Error:
        return None


def cell_key(v):
    rank = 0 if v is None else 1 if isinstance(v, (int, float)) else 2
    return (rank, 0 if v is None else v)


def same_rows(a, b):
    if a is None or b is None or len(a) != len(b):
        return False
    a = sorted(a, key=lambda r: [cell_key(v) for v in r])
    b = sorted(b, key=lambda r: [cell_key(v) for v in r])
    for ra, rb in zip(a, b):
        if len(ra) != len(rb):
            return False
        for x, y in zip(ra, rb):
            if isinstance(x, float) or isinstance(y, float):
                if x is None or y is None or isinstance(x, str) or isinstance(y, str):
                    return False
                if abs(x - y) > 1e-6 * max(1.0, abs(x), abs(y)):
                    return False
            elif x != y or type(x) is not type(y):
                return False
    return True


def knowledge_line(text):
    return "External knowledge:\n" + text + "\n"


def check(inst, con):
    gen = inst["gen"] or inst["evidence"]
    gold_k = inst["sql_gold_k"] or inst["sql"]
    gen_k = inst["sql_gen_k"] or gold_k
    if gen == inst["evidence"] and gen_k != gold_k:
        raise SystemExit(f"instance {inst['id']}: identical knowledge must give identical SQL")
    y = run(con, inst["sql"])
    if y is None:
        raise SystemExit(f"instance {inst['id']}: gold SQL does not execute")
    v_gold_k = run(con, gold_k)
    v_gen_k = run(con, gen_k)
    v_base = run(con, inst["sql_base"])
    expect = inst["expect"]
    assisted = same_rows(y, v_gen_k)
    baseline = same_rows(y, v_base)
    influence = {(False, True): "assistance", (True, False): "misleading",
                 (False, False): "inoperative", (True, True): "sustainable"}[(baseline, assisted)]
    if influence != expect["influence"]:
        raise SystemExit(f"instance {inst['id']}: influence {influence}, want "
                         f"{expect['influence']}")
    quarantined = v_gold_k is None
    if quarantined != expect.get("quarantine", False):
        raise SystemExit(f"instance {inst['id']}: quarantine mismatch")
    db_pair = not quarantined and gen != inst["evidence"] and not same_rows(v_gold_k, v_gen_k)
    if db_pair != expect.get("db", False):
        raise SystemExit(f"instance {inst['id']}: db pair {db_pair}")


def main():
    root = os.path.abspath(sys.argv[1] if len(sys.argv) > 1 else
                           os.path.join(os.path.dirname(__file__), "..", "data", "mini"))
    for sub in ("db/schools", "db/flights", "stubs"):
        os.makedirs(os.path.join(root, sub), exist_ok=True)
    paths = {name: os.path.join(root, "db", name, name + ".sqlite")
             for name in ("schools", "flights")}
    for p in paths.values():
        if os.path.exists(p):
            os.remove(p)
    build_schools(paths["schools"])
    build_flights(paths["flights"])

    cons = {name: sqlite3.connect(p) for name, p in paths.items()}
    for inst in INSTANCES:
        check(inst, cons[inst["db"]])

    records, knowledge_rules, sql_rules = [], [], []
    for inst in INSTANCES:
        rec = {"question_id": inst["id"], "db_id": inst["db"], "question": inst["question"],
               "evidence": inst["evidence"], "SQL": inst["sql"]}
        if inst["difficulty"] is not None:
            rec["difficulty"] = inst["difficulty"]
        records.append(rec)
        question_line = "Question: " + inst["question"] + "\n"
        gen = inst["gen"] or inst["evidence"]
        gold_k = inst["sql_gold_k"] or inst["sql"]
        gen_k = inst["sql_gen_k"] or gold_k
        knowledge_rules.append({"contains": [question_line], "completion": gen})
        sql_rules.append({"contains": [question_line, knowledge_line(inst["evidence"])],
                          "completion": "```sql\n" + gold_k + "\n```"})
        if gen != inst["evidence"]:
            sql_rules.append({"contains": [question_line, knowledge_line(gen)],
                              "completion": "```sql\n" + gen_k + "\n```"})
        sql_rules.append({"contains": [question_line],
                          "completion": "```sql\n" + inst["sql_base"] + "\n```"})

    with open(os.path.join(root, "instances.jsonl"), "w") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")
    for name, rules in (("knowledge_stub.json", knowledge_rules), ("sql_stub.json", sql_rules)):
        with open(os.path.join(root, "stubs", name), "w") as f:
            json.dump({"rules": rules}, f, indent=2)
            f.write("\n")

    logprobs = [
        {"instance_id": "equal-reward", "beta": 0.1,
         "chosen": {"tokens": [1, 2], "target_logprobs": [-1.0, -2.0],
                    "reference_logprobs": [-1.0, -2.0]},
         "rejected": {"tokens": [3], "target_logprobs": [-0.5], "reference_logprobs": [-0.5]}},
        {"instance_id": "reward-gap-3", "beta": 0.1,
         "chosen": {"tokens": [11, 12, 13], "target_logprobs": [-3.0, -3.0, -4.0],
                    "reference_logprobs": [-4.0, -4.0, -4.0]},
         "rejected": {"tokens": [21, 22], "target_logprobs": [-2.0, -2.0],
                      "reference_logprobs": [-1.5, -1.5]}},
        {"instance_id": "uniform-over-4", "beta": 0.1,
         "chosen": {"tokens": [7, 8], "target_logprobs": [-math.log(4), -math.log(4)],
                    "reference_logprobs": [-math.log(4), -math.log(4)]},
         "rejected": {"tokens": [9], "target_logprobs": [-1.0], "reference_logprobs": [-1.0]}},
    ]
    with open(os.path.join(root, "logprobs.jsonl"), "w") as f:
        for rec in logprobs:
            f.write(json.dumps(rec) + "\n")
    print(f"wrote {len(records)} instances to {root}")


if __name__ == "__main__":
    main()
