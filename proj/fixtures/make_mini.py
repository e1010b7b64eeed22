"""Writes the mini ArgKP-style corpus and the mock generation fixture.

Run from the repository root: python3 fixtures/make_mini.py
"""
import csv
import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent

TOPICS = {
    "Routine child vaccinations should be mandatory": {
        1: [
            ("Mandatory vaccination protects children who are too young or too sick to be vaccinated",
             ["Vulnerable kids who cannot get shots rely on everyone else being immunised.",
              "Babies too young for the vaccine are only safe when the children around them are vaccinated.",
              "Children undergoing chemotherapy cannot be vaccinated and depend on herd immunity.",
              "Herd immunity only works if nearly every child is vaccinated, which needs a mandate.",
              "Making vaccines compulsory shields kids with weak immune systems from outbreaks.",
              "An unvaccinated classmate can infect a child whose allergy rules out the vaccine.",
              "Required shots keep diseases away from infants who have not had their first dose yet."],
             ["Who is protected when every child in a class is vaccinated?",
              "Should parents be required to vaccinate to protect children who cannot be vaccinated?",
              "Does herd immunity depend on mandatory vaccination?",
              "Are infants safer when vaccination is compulsory?",
              "Do immunocompromised children rely on others being vaccinated?"]),
            ("Vaccines are safe and effective at preventing serious disease",
             ["Decades of research show that childhood vaccines are safe.",
              "The measles vaccine prevents almost every case of measles in vaccinated kids.",
              "Serious side effects from routine vaccines are extremely rare.",
              "Vaccines have nearly eliminated polio, which shows they work.",
              "Clinical trials demonstrate that the standard schedule is safe for children.",
              "Vaccinated children are far less likely to be hospitalised with whooping cough.",
              "Medical evidence overwhelmingly supports the safety of childhood immunisation."],
             ["Are childhood vaccines safe?",
              "Do vaccines prevent serious disease in children?",
              "Is there evidence that routine vaccines work?",
              "Are side effects of childhood vaccines rare?",
              "Has vaccination reduced diseases like polio and measles?"]),
            ("Preventing outbreaks saves public money and hospital capacity",
             ["Outbreaks of measles cost health systems millions to contain.",
              "Treating preventable diseases wastes hospital beds that others need.",
              "Vaccinating every child is far cheaper than treating epidemics.",
              "Schools lose teaching days when preventable diseases spread.",
              "Public health budgets are strained by avoidable outbreaks.",
              "Parents miss work when their children catch diseases that a vaccine would have prevented.",
              "Mandates prevent costly emergency responses to epidemics."],
             ["Do outbreaks of preventable disease cost public money?",
              "Is vaccination cheaper than treating epidemics?",
              "Would mandatory vaccination free up hospital capacity?",
              "Do preventable diseases disrupt schools and workplaces?",
              "Should public health budgets fund vaccine mandates?"]),
        ],
        -1: [
            ("Parents should have the right to make medical decisions for their children",
             ["Parents, not the state, should decide what goes into their child's body.",
              "A mandate takes away a family's right to choose medical treatment.",
              "Forcing vaccination violates parental autonomy.",
              "Medical choices belong to parents who know their children best.",
              "The government should not override a parent's health decisions.",
              "Compulsory vaccination undermines the freedom of families to decide.",
              "Parents must keep the right to refuse a medical procedure for their kids."],
             ["Should parents decide whether their children are vaccinated?",
              "Does a vaccine mandate violate parental rights?",
              "Should the government override parents on medical decisions?",
              "Is freedom of choice more important than a mandate?",
              "Who should make medical decisions for children?"]),
            ("Vaccines can cause side effects and some children react badly",
             ["Some children suffer allergic reactions to vaccines.",
              "Vaccines can cause fevers and seizures in rare cases.",
              "No medical product is risk free, and vaccines are no exception.",
              "A child who reacted badly to one shot should not be forced to take more.",
              "Adverse reactions are underreported, so the risks may be larger than we think.",
              "Kids with certain conditions can be harmed by a vaccine.",
              "Side effects are real and a mandate ignores individual risk."],
             ["Can vaccines cause harmful side effects?",
              "Should children who react badly be exempt from vaccination?",
              "Are vaccine risks underreported?",
              "Is any medical product risk free?",
              "Does a mandate ignore individual medical risk?"]),
            ("Mandates erode trust and push hesitant families away",
             ["Coercion makes hesitant parents trust doctors even less.",
              "Education persuades parents better than punishment does.",
              "Mandates turn a health question into a political fight.",
              "Families who feel forced may avoid the health system entirely.",
              "Persuasion builds lasting confidence while mandates breed resentment.",
              "Punishing parents for refusing will harden their opposition.",
              "Trust in public health drops when people feel coerced."],
             ["Do vaccine mandates reduce trust in doctors?",
              "Is education more effective than a mandate?",
              "Could coercion push families away from health care?",
              "Do mandates politicise public health?",
              "Does persuasion work better than punishment?"]),
        ],
    },
    "Social media platforms should be regulated by the government": {
        1: [
            ("Regulation is needed to stop the spread of harmful misinformation",
             ["False health claims spread on social media faster than corrections.",
              "Platforms profit from viral misinformation and will not stop it on their own.",
              "Government rules could force platforms to remove dangerous lies.",
              "Election misinformation online threatens democracy and needs oversight.",
              "Without regulation, conspiracy theories reach millions unchecked.",
              "Fake news on social media has caused real-world violence.",
              "Rules would make platforms responsible for the falsehoods they amplify."],
             ["Should platforms be required to remove misinformation?",
              "Does misinformation on social media cause harm?",
              "Will platforms stop fake news without regulation?",
              "Does online misinformation threaten elections?",
              "Should platforms be responsible for what they amplify?"]),
            ("Regulation would protect children and vulnerable users",
             ["Children are exposed to harmful content that platforms fail to filter.",
              "Teenagers' mental health suffers from addictive platform design.",
              "Cyberbullying on social media needs stronger legal protections.",
              "Platforms collect data on minors without meaningful consent.",
              "Vulnerable users are targeted by predators on unregulated apps.",
              "Age limits are meaningless unless the law enforces them.",
              "Addictive feeds are designed to keep young people scrolling."],
             ["Does social media harm children's mental health?",
              "Should the law protect minors online?",
              "Are platforms designed to be addictive?",
              "Should age limits on social media be enforced?",
              "Do platforms fail to stop cyberbullying?"]),
            ("Platforms misuse personal data and need privacy rules",
             ["Social media companies sell user data without real consent.",
              "Personal information is harvested and used to manipulate users.",
              "Privacy laws would stop platforms tracking people across the web.",
              "Data breaches at platforms expose millions of users.",
              "Users cannot control how their data is shared with advertisers.",
              "Targeted advertising relies on invasive data collection.",
              "Regulation could give users ownership of their personal data."],
             ["Do social media companies misuse personal data?",
              "Should privacy laws apply to platforms?",
              "Can users control how their data is used?",
              "Is targeted advertising invasive?",
              "Should users own their personal data?"]),
        ],
        -1: [
            ("Social media regulation would restrict freedom of speech",
             ["Government control of social media is the first step towards censorship.",
              "Regulating platforms threatens free expression online.",
              "Officials would decide what people are allowed to say.",
              "Free speech includes the right to say unpopular things online.",
              "Content rules will be abused to silence critics of the government.",
              "Regulation would chill open debate on social media.",
              "People should be free to post their opinions without state interference."],
             ["Would regulation of social media restrict free speech?",
              "Is government control of platforms a form of censorship?",
              "Should the state decide what people can say online?",
              "Could content rules silence government critics?",
              "Does regulation chill open debate?"]),
            ("It is impossible to regulate social media effectively",
             ["Platforms operate across borders, so national rules cannot be enforced.",
              "The volume of posts is far too large for any regulator to review.",
              "Technology changes faster than laws can be written.",
              "Regulators lack the technical expertise to oversee platforms.",
              "Users will simply move to unregulated services abroad.",
              "Rules written today will be obsolete by the time they pass.",
              "Enforcement across billions of posts is not practical."],
             ["Can governments regulate global platforms?",
              "Is the volume of content too large to regulate?",
              "Do laws keep pace with technology?",
              "Do regulators have the expertise to oversee platforms?",
              "Would users move to unregulated services?"]),
            ("Platforms and users can regulate themselves",
             ["Platforms already moderate content through their own policies.",
              "Users can block, mute and report harmful accounts themselves.",
              "Market competition pushes platforms to behave responsibly.",
              "Community moderation works better than government rules.",
              "Companies improve their policies when users complain.",
              "Parents and schools can teach safe social media use.",
              "Self-regulation is more flexible than legislation."],
             ["Can platforms moderate themselves?",
              "Are user tools enough to deal with harmful content?",
              "Does competition make platforms act responsibly?",
              "Is self-regulation better than legislation?",
              "Should education replace regulation?"]),
        ],
    },
}

# Arguments that match none of their slice's key points.
STRAYS = {
    ("Routine child vaccinations should be mandatory", 1): "Other countries with mandates have seen good results.",
    ("Routine child vaccinations should be mandatory", -1): "The schedule has too many shots at once.",
    ("Social media platforms should be regulated by the government", 1): "Big tech companies have too much power.",
    ("Social media platforms should be regulated by the government", -1): "Existing laws already cover illegal content.",
}


def main():
    rng = random.Random(7)
    args, kps, labels, gens = [], [], [], []
    for t_index, (topic, by_stance) in enumerate(TOPICS.items()):
        for stance, themes in by_stance.items():
            s_tag = "pro" if stance == 1 else "con"
            slice_kps = []
            for k_index, (kp_text, _, _) in enumerate(themes):
                kp_id = f"kp_{t_index}_{s_tag}_{k_index}"
                kps.append([kp_id, kp_text, topic, stance])
                slice_kps.append(kp_id)
            pool = []
            for k_index, (_, arg_texts, questions) in enumerate(themes):
                for text in arg_texts[:6] if k_index < 2 else arg_texts:
                    pool.append((k_index, text, questions))
            pool.append((None, STRAYS[(topic, stance)], None))
            assert len(pool) == 20, (topic, stance, len(pool))
            for a_index, (k_index, text, questions) in enumerate(pool):
                arg_id = f"arg_{t_index}_{s_tag}_{a_index:02d}"
                args.append([arg_id, text, topic, stance])
                for kp_pos, kp_id in enumerate(slice_kps):
                    roll = rng.random()
                    if roll < 0.1:
                        continue  # left unannotated: undecided
                    labels.append([arg_id, kp_id, 1 if kp_pos == k_index else 0])
                if questions is None:
                    picked = ["What else should be considered?", "Is there another reason?"]
                else:
                    picked = rng.sample(questions, 3)
                response = "\n".join(f"{i + 1}. {q}" for i, q in enumerate(picked))
                gens.append({"key": text, "response": response})

    corpus = OUT / "mini"
    corpus.mkdir(exist_ok=True)
    with open(corpus / "arguments.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["arg_id", "argument", "topic", "stance"])
        w.writerows(args)
    with open(corpus / "key_points.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["key_point_id", "key_point", "topic", "stance"])
        w.writerows(kps)
    with open(corpus / "labels.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["arg_id", "key_point_id", "label"])
        w.writerows(labels)
    with open(OUT / "mini_generations.jsonl", "w") as f:
        for g in gens:
            f.write(json.dumps(g, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
