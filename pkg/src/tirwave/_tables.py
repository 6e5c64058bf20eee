"""Filter coefficient tables. Generated by tools/gen_filter_tables.py; do not edit."""

# Orthogonal analysis low-pass taps, correlation order.
ORTHOGONAL = {
    ("daubechies", 1): (
        0.7071067811865475244,
        0.7071067811865475244,
    ),
    ("daubechies", 2): (
        0.48296291314453414337,
        0.83651630373780790558,
        0.22414386804201338103,
        -0.12940952255126038117,
    ),
    ("daubechies", 3): (
        0.332670552950082616,
        0.80689150931109257649,
        0.4598775021184915701,
        -0.1350110200102545887,
        -0.085441273882026661693,
        0.035226291885709536603,
    ),
    ("daubechies", 4): (
        0.23037781330889650086,
        0.71484657055291564709,
        0.63088076792985890788,
        -0.027983769416859854211,
        -0.18703481171909308408,
        0.030841381835560763627,
        0.032883011666885199735,
        -0.010597401785069032105,
    ),
    ("daubechies", 5): (
        0.16010239797419291448,
        0.60382926979718967054,
        0.72430852843777292773,
        0.13842814590132073151,
        -0.24229488706638203186,
        -0.032244869584638374648,
        0.077571493840045713523,
        -0.0062414902127982742742,
        -0.012580751999081999469,
        0.003335725285473771278,
    ),
    ("daubechies", 6): (
        0.11154074335010946362,
        0.49462389039845308568,
        0.75113390802109535068,
        0.31525035170919762909,
        -0.22626469396543982008,
        -0.12976686756726193556,
        0.097501605587323049102,
        0.027522865530305728626,
        -0.031582039317486029565,
        0.00055384220116149613925,
        0.0047772575109455106396,
        -0.0010773010853084795649,
    ),
    ("daubechies", 7): (
        0.07785205408500917902,
        0.39653931948191730654,
        0.72913209084623511992,
        0.46978228740519312247,
        -0.14390600392856497541,
        -0.22403618499387498264,
        0.071309219266830264751,
        0.080612609151083071913,
        -0.03802993693501441358,
        -0.016574541630666880654,
        0.012550998556099840613,
        0.00042957797292136652113,
        -0.0018016407040474909153,
        0.00035371379997452024845,
    ),
    ("daubechies", 8): (
        0.054415842243104009955,
        0.31287159091429997066,
        0.67563073629728980681,
        0.58535468365420671277,
        -0.015829105256349305667,
        -0.28401554296154692652,
        0.00047248457391328277036,
        0.12874742662047845886,
        -0.01736930100180754617,
        -0.044088253930794751507,
        0.013981027917398281649,
        0.0087460940474057767164,
        -0.0048703529934515743104,
        -0.0003917403733769470463,
        0.00067544940645056936637,
        -0.00011747678412476953373,
    ),
    ("daubechies", 9): (
        0.038077947363878346589,
        0.24383467461259035373,
        0.6048231236901111119,
        0.65728807805130053808,
        0.13319738582500757619,
        -0.29327378327917490881,
        -0.096840783222976460514,
        0.14854074933810638014,
        0.030725681479333379212,
        -0.067632829061329973676,
        0.00025094711483145195759,
        0.022361662123679097205,
        -0.0047232047577513972779,
        -0.0042815036824634298345,
        0.0018476468830562264766,
        0.00023038576352319596721,
        -0.00025196318894271013697,
        0.000039347320316271599481,
    ),
    ("daubechies", 10): (
        0.026670057900555553587,
        0.18817680007769148902,
        0.52720118893172558648,
        0.68845903945360356574,
        0.28117234366057746075,
        -0.24984642432731537942,
        -0.1959462743773770435,
        0.12736934033579326008,
        0.09305736460357235116,
        -0.071394147166397087145,
        -0.029457536821875812858,
        0.03321267405934100174,
        0.0036065535669561696554,
        -0.010733175483330575044,
        0.0013953517470529011658,
        0.0019924052951850561172,
        -0.00068585669495971162656,
        -0.00011646685512928545095,
        0.000093588670320069591334,
        -0.000013264202894521244812,
    ),
    ("symlet", 2): (
        0.48296291314453414337,
        0.83651630373780790558,
        0.22414386804201338103,
        -0.12940952255126038117,
    ),
    ("symlet", 3): (
        0.332670552950082616,
        0.80689150931109257649,
        0.4598775021184915701,
        -0.1350110200102545887,
        -0.085441273882026661693,
        0.035226291885709536603,
    ),
    ("symlet", 4): (
        0.032223100604051467872,
        -0.012603967262031303754,
        -0.099219543576633532585,
        0.2978577956053060514,
        0.80373875180513208088,
        0.49761866763277498998,
        -0.029635527646002491764,
        -0.075765714789502213228,
    ),
    ("symlet", 5): (
        0.027333068344998768818,
        0.02951949092570626125,
        -0.039134249302313843624,
        0.1993975339768555969,
        0.72340769040404079207,
        0.63397896345679206372,
        0.016602105764510848133,
        -0.17532808990805622424,
        -0.021101834024689041001,
        0.019538882735249826776,
    ),
    ("symlet", 6): (
        0.015404109327044824299,
        0.0034907120842221625153,
        -0.1179901111485200254,
        -0.048311742585698054971,
        0.49105594192797373304,
        0.78764114102865099607,
        0.33792942172816583271,
        -0.072637522786376583464,
        -0.021060292512370847992,
        0.044724901770781384663,
        0.001767711864254007741,
        -0.0078007083250323804142,
    ),
    ("symlet", 7): (
        0.0026818145682601470291,
        -0.0010473848886797380865,
        -0.012636303403240566583,
        0.030515513165877885745,
        0.067892693501220564905,
        -0.049552834937042832301,
        0.017441255086835706851,
        0.53610191709056923066,
        0.76776431700488293117,
        0.2886296317506478747,
        -0.14004724044293365414,
        -0.10780823770328971255,
        0.0040102448715223951678,
        0.010268176708464816231,
    ),
    ("symlet", 8): (
        0.0018899503327676891843,
        -0.00030292051472413308126,
        -0.014952258337062199118,
        0.0038087520138944894631,
        0.049137179673730286787,
        -0.027219029917103486322,
        -0.051945838107881800736,
        0.36444189483617893676,
        0.77718575169962802862,
        0.48135965125905339159,
        -0.061273359067811077843,
        -0.14329423835127266284,
        0.0076074873249766081919,
        0.031695087811525991431,
        -0.00054213233180001068935,
        -0.0033824159510050025955,
    ),
    ("symlet", 9): (
        0.0010694900329086119159,
        -0.00047315449868004354219,
        -0.010264064027633120485,
        0.0088592674934002666972,
        0.06207778930288574757,
        -0.01823377077939550557,
        -0.19155083129728433495,
        0.035272488035271042689,
        0.61733844914093415132,
        0.71789708276441240466,
        0.23876091460730516626,
        -0.054568958430833351097,
        0.00058346274612498183102,
        0.030224878858275188135,
        -0.011528210207679186143,
        -0.013271967781817133806,
        0.00061978088898550708094,
        0.0014009155259146562313,
    ),
    ("symlet", 10): (
        0.00077015980911445982258,
        0.000095632670722852730785,
        -0.008641299277022150261,
        -0.0014653825813046105136,
        0.045927239231091508585,
        0.011609893903711318064,
        -0.15949427888491060946,
        -0.070880535783231572286,
        0.47169066693844291,
        0.76951003702109793678,
        0.38382676106707632626,
        -0.035536740473819585816,
        -0.031990056882428113921,
        0.049994972077375156277,
        0.005764912033581149672,
        -0.020354939812311110745,
        -0.00080435893201645129606,
        0.0045931735853117919475,
        0.000057036083618495006815,
        -0.00045932942100465204019,
    ),
    ("coiflet", 1): (
        -0.07273261951252645,
        0.33789766245748182,
        0.85257202021160039,
        0.38486484686485778,
        -0.07273261951252645,
        -0.01565572813579199,
    ),
    ("coiflet", 2): (
        0.01638733646320364,
        -0.04146493678687178,
        -0.06737255472372559,
        0.38611006682276289,
        0.81272363544941351,
        0.41700518442323908,
        -0.07648859907828076,
        -0.05943441864643109,
        0.02368017194684777,
        0.00561143481936883,
        -0.00182320887091103,
        -0.00072054944552035,
    ),
    ("coiflet", 3): (
        -0.0037935128643808,
        0.00778259642567275,
        0.02345269614207717,
        -0.06577191128146936,
        -0.06112339000297255,
        0.40517690240911824,
        0.79377722262608719,
        0.42848347637737,
        -0.07179982161915484,
        -0.08230192710629983,
        0.03455502757329774,
        0.01588054486366945,
        -0.00900797613673062,
        -0.0025745176881368,
        0.00111751877083063,
        0.0004662169598204,
        -0.00007098330250638,
        -0.00003459977319727,
    ),
}

# Symmetric biorthogonal low-pass pairs (analysis, synthesis), centred taps.
BIORTHOGONAL = {
    (2, 2): (
        (
            -0.1767766952966368811,
            0.3535533905932737622,
            1.0606601717798212866,
            0.3535533905932737622,
            -0.1767766952966368811,
        ),
        (
            0.3535533905932737622,
            0.7071067811865475244,
            0.3535533905932737622,
        ),
    ),
    (2, 4): (
        (
            0.033145630368119415206,
            -0.066291260736238830413,
            -0.1767766952966368811,
            0.41984465132951259261,
            0.99436891104358245619,
            0.41984465132951259261,
            -0.1767766952966368811,
            -0.066291260736238830413,
            0.033145630368119415206,
        ),
        (
            0.3535533905932737622,
            0.7071067811865475244,
            0.3535533905932737622,
        ),
    ),
    (2, 6): (
        (
            -0.006905339660024878168,
            0.013810679320049756336,
            0.046956309688169171542,
            -0.10772329869638809942,
            -0.16987135563661200293,
            0.44746600996961210528,
            0.96674755240348294352,
            0.44746600996961210528,
            -0.16987135563661200293,
            -0.10772329869638809942,
            0.046956309688169171542,
            0.013810679320049756336,
            -0.006905339660024878168,
        ),
        (
            0.3535533905932737622,
            0.7071067811865475244,
            0.3535533905932737622,
        ),
    ),
    (2, 8): (
        (
            0.0015105430506304420992,
            -0.0030210861012608841985,
            -0.012947511862546646565,
            0.028916109826354177328,
            0.052998481890690939939,
            -0.13491307360773605721,
            -0.16382918343409023454,
            0.46257144047591652628,
            0.95164212189717852252,
            0.46257144047591652628,
            -0.16382918343409023454,
            -0.13491307360773605721,
            0.052998481890690939939,
            0.028916109826354177328,
            -0.012947511862546646565,
            -0.0030210861012608841985,
            0.0015105430506304420992,
        ),
        (
            0.3535533905932737622,
            0.7071067811865475244,
            0.3535533905932737622,
        ),
    ),
    (4, 4): (
        (
            0.037828455506995461393,
            -0.023849465019380001913,
            -0.11062440441842340885,
            0.37740285561265376411,
            0.85269867900940341931,
            0.37740285561265376411,
            -0.11062440441842340885,
            -0.023849465019380001913,
            0.037828455506995461393,
        ),
        (
            -0.064538882628938438637,
            -0.040689417609558436724,
            0.41809227322221220084,
            0.78848561640566439785,
            0.41809227322221220084,
            -0.040689417609558436724,
            -0.064538882628938438637,
        ),
    ),
}

# Quarter-shift prototype: published taps and the refined taps in use.
QSHIFT_14_PUBLISHED = (
    0.0032531427636532,
    -0.0038832119991585,
    0.0346603468448535,
    -0.0388728012688278,
    -0.1172038876991153,
    0.275295384668882,
    0.7561456438925225,
    0.5688104207121227,
    0.011866092033797,
    -0.1067118046866654,
    0.0238253847949203,
    0.017025223881554,
    -0.0054394759372741,
    -0.0045568956284755,
)

QSHIFT_14 = (
    0.00325313145393785624,
    -0.0038832003841907742312,
    0.034660230008252283618,
    -0.03887268833066861164,
    -0.11720401465701729257,
    0.27529548310269076693,
    0.75614553372343879822,
    0.56881053235908199382,
    0.011865974004314652941,
    -0.10671169218758099944,
    0.023825382688208764045,
    0.01702522337003519426,
    -0.0054394560345875380874,
    -0.0045568767428200453023,
)
