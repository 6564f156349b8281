"""Generate the synthetic labelled-URL fixture used by the test suite.

The URLs imitate the four classes of the Kaggle malicious-URL corpus
(benign / defacement / malware / phishing) closely enough to exercise the
whole pipeline, including phishing URLs that borrow benign brand tokens.

    python scripts/make_fixture_corpus.py --n 4000 --out tests/data/fixture_urls.csv
"""

import argparse
import csv
import random

WORDS = """news about account home page blog store shop help support wiki article video music
game sport weather travel food health movie book photo image search login user profile settings
docs faq contact team product service cloud mail map drive events school library course research""".split()
BRANDS = "paypal apple amazon google microsoft netflix chase wellsfargo bankofamerica facebook instagram dropbox".split()
TLDS_BENIGN = "com org net edu gov co.uk de io".split()
TLDS_SHADY = "xyz top info tk ml ga cf gq ru cn biz online".split()
DEFACE_CMS = ["index.php?option=com_content&view=article&id={a}&Itemid={b}",
              "index.php?option=com_user&view=register",
              "index.php/component/content/article/{a}-{w}",
              "?p={a}", "index.php?option=com_mailto&tmpl=component&link={h}"]
MALWARE_FILES = ["mozi.m", "mozi.a", "i", "bins/x86", "bot.exe", "update.exe", "setup.apk", "invoice.doc",
                 "payload.bin", "Photo.scr", "a.sh"]


def _word(rng, k=1):
    return "-".join(rng.choice(WORDS) for _ in range(k))


def benign(rng):
    host = rng.choice([f"www.{_word(rng)}{rng.choice(['', 'hub', 'daily', 'zone'])}",
                       f"{_word(rng)}{rng.randint(1, 99)}", f"{rng.choice(BRANDS)}"])
    url = f"{host}.{rng.choice(TLDS_BENIGN)}/{_word(rng)}/{_word(rng, rng.randint(1, 3))}"
    if rng.random() < 0.3:
        url += f"?id={rng.randint(1, 9999)}"
    if rng.random() < 0.4:
        url = "https://" + url
    return url


def defacement(rng):
    path = rng.choice(DEFACE_CMS).format(a=rng.randint(1, 999), b=rng.randint(1, 99), w=_word(rng),
                                         h=f"{rng.getrandbits(32):08x}")
    return f"http://www.{_word(rng)}{rng.choice(['', '-club', '-school', '-online'])}.{rng.choice(TLDS_BENIGN + ['com.br', 'it', 'nl'])}/{path}"


def malware(rng):
    if rng.random() < 0.6:
        host = ".".join(str(rng.randint(1, 254)) for _ in range(4)) + f":{rng.choice([80, 8080, 443, 52869, 37215])}"
    else:
        host = f"{_word(rng)}{rng.randint(100, 999)}.{rng.choice(TLDS_SHADY)}"
    return f"http://{host}/{rng.choice(MALWARE_FILES)}"


def phishing(rng):
    brand = rng.choice(BRANDS)
    style = rng.random()
    if style < 0.4:
        host = f"{brand}-{rng.choice(['secure', 'verify', 'login', 'account', 'update'])}.{rng.choice(TLDS_SHADY)}"
    elif style < 0.7:
        host = f"{brand}.com.{rng.choice(['verify', 'signin', 'security'])}-{rng.randint(10, 99)}.{rng.choice(TLDS_SHADY)}"
    else:
        # mimics a benign path on a look-alike host
        host = f"www.{_word(rng)}.{rng.choice(TLDS_BENIGN)}/~{brand}"
    return f"{host}/{rng.choice(['signin', 'webscr', 'login.php', 'verify', 'account/update'])}{rng.choice(['', '?cmd=_login', '?session=' + str(rng.randint(1000, 9999))])}"


GENERATORS = {"benign": benign, "defacement": defacement, "malware": malware, "phishing": phishing}
# roughly the class balance of the Kaggle corpus
SHARES = {"benign": 0.66, "defacement": 0.15, "malware": 0.05, "phishing": 0.14}


def generate(n: int, seed: int = 7):
    rng = random.Random(seed)
    rows = []
    for label, share in SHARES.items():
        rows += [(GENERATORS[label](rng), label) for _ in range(round(n * share))]
    rng.shuffle(rows)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default="tests/data/fixture_urls.csv")
    args = ap.parse_args()
    with open(args.out, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["url", "type"])
        w.writerows(generate(args.n, args.seed))


if __name__ == "__main__":
    main()
