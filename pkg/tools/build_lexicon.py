#!/usr/bin/env python3
"""Regenerate the fixture lexicon TSV from regular French-style paradigms.

The fixture is a synthetic, internally consistent table: regular -er
verbs (present, imperfect, past participle, infinitive), nouns with -s
plurals, four-form adjectives and a closed list of function words, plus
a small hand-written irregular block.  It is not a French coverage
claim; verbs with stem mutations or irregular plurals are excluded so
the naive rules never produce surprising strings.

Usage: python3 tools/build_lexicon.py [out.tsv]
"""

import sys
from pathlib import Path

# Only fully regular -er verbs: no -ger/-cer/-yer spelling changes and
# no stem mutations, so the naive endings are always right.
ER_VERBS = """
parler marcher chanter danser donner porter regarder écouter jouer
travailler habiter laver trouver penser aimer passer rester monter
tomber garder montrer fermer gagner compter couper laisser pousser
tirer toucher tourner sauter crier pleurer rêver souhaiter accepter
refuser apporter emporter attraper chasser chercher visiter inviter
décider demander raconter expliquer écraser dessiner copier étudier
oublier frapper casser aider déconcerter dépasser déjeuner dîner
fumer griller saluer signer skier téléphoner vider deviner emprunter
enfermer entourer éviter exister fabriquer féliciter fêter filmer
freiner glisser goûter grimper guider habiller hésiter imaginer
imiter informer installer insister inventer jardiner klaxonner
limiter livrer louer marquer mériter mesurer murmurer noter observer
occuper organiser oser parier participer patiner pêcher peigner
percher plier pomper poser présenter prêter profiter proposer
prouver quitter raser récolter recopier redouter regretter remarquer
rencontrer rentrer réparer repasser réserver respirer ressembler
retarder retirer retourner réveiller rouler
""".split()

NOUNS = [
    # (lemma, gender)
    ("chat", "m"), ("chien", "m"), ("livre", "m"), ("jardin", "m"),
    ("arbre", "m"), ("mur", "m"), ("toit", "m"), ("lit", "m"),
    ("train", "m"), ("avion", "m"), ("vélo", "m"), ("camion", "m"),
    ("pont", "m"), ("chemin", "m"), ("village", "m"), ("marché", "m"),
    ("magasin", "m"), ("prix", "m"), ("temps", "m"), ("matin", "m"),
    ("soir", "m"), ("jour", "m"), ("mois", "m"), ("an", "m"),
    ("ami", "m"), ("voisin", "m"), ("garçon", "m"), ("frère", "m"),
    ("père", "m"), ("fils", "m"), ("roi", "m"), ("chef", "m"),
    ("docteur", "m"), ("facteur", "m"), ("boulanger", "m"), ("fermier", "m"),
    ("poisson", "m"), ("lapin", "m"), ("renard", "m"), ("loup", "m"),
    ("mouton", "m"), ("cochon", "m"), ("canard", "m"), ("pigeon", "m"),
    ("fruit", "m"), ("pain", "m"), ("fromage", "m"), ("verre", "m"),
    ("plat", "m"), ("repas", "m"), ("papier", "m"), ("stylo", "m"),
    ("crayon", "m"), ("sac", "m"),
    ("pantalon", "m"), ("soulier", "m"), ("bruit", "m"), ("vent", "m"),
    ("nuage", "m"), ("ciel", "m"), ("soleil", "m"), ("monde", "m"),
    ("maison", "f"), ("voiture", "f"), ("table", "f"), ("porte", "f"),
    ("fenêtre", "f"), ("fleur", "f"), ("plante", "f"), ("feuille", "f"),
    ("route", "f"), ("rue", "f"), ("ville", "f"), ("école", "f"),
    ("classe", "f"), ("leçon", "f"), ("page", "f"), ("lettre", "f"),
    ("phrase", "f"), ("histoire", "f"), ("chanson", "f"), ("musique", "f"),
    ("amie", "f"), ("voisine", "f"), ("fille", "f"), ("sœur", "f"),
    ("mère", "f"), ("dame", "f"), ("reine", "f"), ("docteure", "f"),
    ("vache", "f"), ("poule", "f"), ("souris", "f"), ("chèvre", "f"),
    ("pomme", "f"), ("poire", "f"), ("fraise", "f"), ("tomate", "f"),
    ("soupe", "f"), ("tasse", "f"), ("assiette", "f"), ("cuisine", "f"),
    ("chambre", "f"), ("salle", "f"), ("cour", "f"), ("ferme", "f"),
    ("forêt", "f"), ("rivière", "f"), ("montagne", "f"), ("plage", "f"),
    ("mer", "f"), ("pluie", "f"), ("neige", "f"), ("nuit", "f"),
    ("heure", "f"), ("minute", "f"), ("semaine", "f"), ("année", "f"),
    ("médecine", "f"), ("médaille", "f"), ("machine", "f"), ("montre", "f"),
]

ADJECTIVES = """
grand petit fort joli noir vert lent haut court chaud froid dur lourd
plein clair droit vrai prochain certain charmant intéressant amusant
content prudent présent distant élégant galant méchant puissant savant
touchant vivant brillant bruyant croquant débutant décevant étonnant
gourmand marrant pesant plaisant ronflant souriant suivant volant
""".split()

PRESENT = [("1", "s", "e"), ("2", "s", "es"), ("3", "s", "e"),
           ("1", "p", "ons"), ("2", "p", "ez"), ("3", "p", "ent")]
IMPERFECT = [("1", "s", "ais"), ("2", "s", "ais"), ("3", "s", "ait"),
             ("1", "p", "ions"), ("2", "p", "iez"), ("3", "p", "aient")]
PARTICIPLE = [("m", "s", "é"), ("f", "s", "ée"), ("m", "p", "és"),
              ("f", "p", "ées")]

FUNCTION_WORDS = [
    # surface, lemma, tag
    ("le", "le", "det-#-#-m-s-l"),
    ("la", "le", "det-#-#-f-s-l"),
    ("les", "le", "det-#-#-#-p-l"),
    ("un", "un", "det-#-#-m-s-l"),
    ("une", "un", "det-#-#-f-s-l"),
    ("des", "un", "det-#-#-#-p-l"),
    ("je", "je", "cln-#-1-#-s-l"),
    ("tu", "tu", "cln-#-2-#-s-l"),
    ("il", "il", "cln-#-3-m-s-l"),
    ("elle", "il", "cln-#-3-f-s-l"),
    ("nous", "lui", "pro-#-1-#-p-l"),
    ("vous", "lui", "pro-#-2-#-p-l"),
    ("ils", "il", "cln-#-3-m-p-l"),
    ("elles", "il", "cln-#-3-f-p-l"),
    ("ça", "ça", "pro-#-3-#-s-l"),
    ("qui", "qui", "pro-#-#-#-#-l"),
    ("que", "que", "pro-#-#-#-#-l"),
    ("et", "et", "conj-#-#-#-#-l"),
    ("mais", "mais", "conj-#-#-#-#-l"),
    ("ou", "ou", "conj-#-#-#-#-l"),
    ("à", "à", "prep-#-#-#-#-l"),
    ("de", "de", "prep-#-#-#-#-l"),
    ("dans", "dans", "prep-#-#-#-#-l"),
    ("sur", "sur", "prep-#-#-#-#-l"),
    ("sous", "sous", "prep-#-#-#-#-l"),
    ("avec", "avec", "prep-#-#-#-#-l"),
    ("pour", "pour", "prep-#-#-#-#-l"),
    ("en", "en", "prep-#-#-#-#-l"),
    ("ne", "ne", "adv-#-#-#-#-l"),
    ("pas", "pas", "adv-#-#-#-#-l"),
    ("très", "très", "adv-#-#-#-#-l"),
    ("bien", "bien", "adv-#-#-#-#-l"),
    ("plus", "plus", "adv-#-#-#-#-l"),
    ("ici", "ici", "adv-#-#-#-#-l"),
    ("là", "là", "adv-#-#-#-#-l"),
    ("voilà", "voilà", "adv-#-#-#-#-l"),
    ("où", "où", "adv-#-#-#-#-l"),
    (".", ".", "pct-#-#-#-#-l"),
    (",", ",", "pct-#-#-#-#-l"),
    ("!", "!", "pct-#-#-#-#-l"),
    ("?", "?", "pct-#-#-#-#-l"),
]

IRREGULARS = [
    # devenir: the worked example pair devient <-> (devenir, v-P-3-#-s-l)
    ("deviens", "devenir", "v-P-1-#-s-l"),
    ("deviens", "devenir", "v-P-2-#-s-l"),
    ("devient", "devenir", "v-P-3-#-s-l"),
    ("devenons", "devenir", "v-P-1-#-p-l"),
    ("devenez", "devenir", "v-P-2-#-p-l"),
    ("deviennent", "devenir", "v-P-3-#-p-l"),
    ("devenu", "devenir", "vppart-K-#-m-s-l"),
    ("devenue", "devenir", "vppart-K-#-f-s-l"),
    ("devenus", "devenir", "vppart-K-#-m-p-l"),
    ("devenues", "devenir", "vppart-K-#-f-p-l"),
    ("devenir", "devenir", "v-W-#-#-#-l"),
    # être
    ("suis", "être", "v-P-1-#-s-l"),
    ("es", "être", "v-P-2-#-s-l"),
    ("est", "être", "v-P-3-#-s-l"),
    ("sommes", "être", "v-P-1-#-p-l"),
    ("êtes", "être", "v-P-2-#-p-l"),
    ("sont", "être", "v-P-3-#-p-l"),
    ("était", "être", "v-I-3-#-s-l"),
    ("étaient", "être", "v-I-3-#-p-l"),
    ("été", "être", "vppart-K-#-m-s-l"),
    ("être", "être", "v-W-#-#-#-l"),
    # avoir
    ("ai", "avoir", "v-P-1-#-s-l"),
    ("as", "avoir", "v-P-2-#-s-l"),
    ("a", "avoir", "v-P-3-#-s-l"),
    ("avons", "avoir", "v-P-1-#-p-l"),
    ("avez", "avoir", "v-P-2-#-p-l"),
    ("ont", "avoir", "v-P-3-#-p-l"),
    ("eu", "avoir", "vppart-K-#-m-s-l"),
    ("avoir", "avoir", "v-W-#-#-#-l"),
    # payer: both spellings are accepted French; the first entry wins at
    # generation time, which exercises the conflict-count path.
    ("paie", "payer", "v-P-1-#-s-l"),
    ("paie", "payer", "v-P-3-#-s-l"),
    ("paye", "payer", "v-P-1-#-s-l"),
    ("paye", "payer", "v-P-3-#-s-l"),
    ("payons", "payer", "v-P-1-#-p-l"),
    ("payez", "payer", "v-P-2-#-p-l"),
    ("paient", "payer", "v-P-3-#-p-l"),
    ("payer", "payer", "v-W-#-#-#-l"),
]


def verb_entries(infinitive):
    stem = infinitive[:-2]
    rows = []
    for person, number, ending in PRESENT:
        rows.append((stem + ending, infinitive,
                     f"v-P-{person}-#-{number}-l"))
    for person, number, ending in IMPERFECT:
        rows.append((stem + ending, infinitive,
                     f"v-I-{person}-#-{number}-l"))
    for gender, number, ending in PARTICIPLE:
        rows.append((stem + ending, infinitive,
                     f"vppart-K-#-{gender}-{number}-l"))
    rows.append((infinitive, infinitive, "v-W-#-#-#-l"))
    return rows


def noun_entries(lemma, gender):
    return [
        (lemma, lemma, f"nc-#-#-{gender}-s-l"),
        (lemma + "s", lemma, f"nc-#-#-{gender}-p-l"),
    ]


def adjective_entries(lemma):
    return [
        (lemma, lemma, "adj-#-#-m-s-l"),
        (lemma + "e", lemma, "adj-#-#-f-s-l"),
        (lemma + "s", lemma, "adj-#-#-m-p-l"),
        (lemma + "es", lemma, "adj-#-#-f-p-l"),
    ]


def build_rows():
    rows = []
    seen_verbs = set()
    for verb in ER_VERBS:
        if verb in seen_verbs:
            continue
        seen_verbs.add(verb)
        rows.extend(verb_entries(verb))
    for lemma, gender in NOUNS:
        rows.extend(noun_entries(lemma, gender))
    for lemma in ADJECTIVES:
        rows.extend(adjective_entries(lemma))
    rows.extend(FUNCTION_WORDS)
    rows.extend(IRREGULARS)
    return rows


def main(argv):
    out = Path(argv[1]) if len(argv) > 1 else \
        Path(__file__).resolve().parent.parent / "src" / "factored_nmt" / \
        "fixtures" / "lexicon.tsv"
    rows = build_rows()
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("# fixture lexicon: surface<TAB>lemma<TAB>factor-string\n")
        fh.write("# synthetic regular paradigms, not a French coverage claim\n")
        for surface, lemma, tag in rows:
            fh.write(f"{surface}\t{lemma}\t{tag}\n")
    print(f"wrote {len(rows)} entries to {out}")


if __name__ == "__main__":
    main(sys.argv)
