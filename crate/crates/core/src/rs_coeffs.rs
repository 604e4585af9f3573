#![allow(clippy::excessive_precision)]

// Taylor coefficients in x = p - 1/2 of the Riemann-Siegel correction terms C0..C4.

pub(crate) const RS_C0: [f64; 47] = [
    0.38268343236508977173,
    0.0,
    1.7489618723100817974,
    0.0,
    2.1180252076854963732,
    0.0,
    -0.87072166705114807392,
    0.0,
    -3.4733112243465167073,
    0.0,
    -1.6626947308999324496,
    0.0,
    1.2167312889192321345,
    0.0,
    1.3014304161007975773,
    0.0,
    0.030511021827361672421,
    0.0,
    -0.37558030515450952428,
    0.0,
    -0.10857844165640659744,
    0.0,
    0.051832902999549623376,
    0.0,
    0.02999948061990227592,
    0.0,
    -0.002275939670612564226,
    0.0,
    -0.0043826474165803383059,
    0.0,
    -0.00040642301837298469931,
    0.0,
    0.00040060977854221139279,
    0.0,
    0.000089710579913888412978,
    0.0,
    -0.000023025650027239107116,
    0.0,
    -9.3800066019067924847e-6,
    0.0,
    6.3235149476091075042e-7,
    0.0,
    6.5510228192315016662e-7,
    0.0,
    2.2105237455526972587e-8,
    0.0,
    -3.322316176445628835e-8,
];

pub(crate) const RS_C1: [f64; 48] = [
    0.0,
    -0.05365020525675069406,
    0.0,
    0.1102781874108148244,
    0.0,
    1.2317200154315226313,
    0.0,
    1.2634964862799457884,
    0.0,
    -1.6951089975595030184,
    0.0,
    -2.999871196765010089,
    0.0,
    -0.10819944959899208643,
    0.0,
    1.9407662946212712688,
    0.0,
    0.78384235615006865329,
    0.0,
    -0.50548296679003659188,
    0.0,
    -0.38450723496057974051,
    0.0,
    0.037472646465315320676,
    0.0,
    0.090920266109731763173,
    0.0,
    0.010449237550064509218,
    0.0,
    -0.012582979651583416497,
    0.0,
    -0.0033995037211512740851,
    0.0,
    0.0010410950537714891268,
    0.0,
    0.00050109490511184868604,
    0.0,
    -0.000039563596690031815595,
    0.0,
    -0.000047624592453571896387,
    0.0,
    -1.8539355338085132273e-6,
    0.0,
    3.193691808006897204e-6,
    0.0,
    4.0907807608506066327e-7,
    0.0,
    -1.5446624332576632128e-7,
];

pub(crate) const RS_C2: [f64; 51] = [
    0.0051885428302931684938,
    0.0,
    0.0012378633552253898413,
    0.0,
    -0.18137505725166997411,
    0.0,
    0.14291492748532126541,
    0.0,
    1.3303391766687565325,
    0.0,
    0.35224723534037336775,
    0.0,
    -2.4210015958919507238,
    0.0,
    -1.6760787022538108853,
    0.0,
    1.3689416723328372184,
    0.0,
    1.5539019430222983221,
    0.0,
    -0.1722164273472998052,
    0.0,
    -0.6359068055045430989,
    0.0,
    -0.099116498730412081054,
    0.0,
    0.14033480067387008951,
    0.0,
    0.047823520198272922364,
    0.0,
    -0.017356040641479780798,
    0.0,
    -0.010225012534028591844,
    0.0,
    0.00092741491597948878994,
    0.0,
    0.0013572194372373385345,
    0.0,
    0.0000641369012029388009,
    0.0,
    -0.00012300805698196629883,
    0.0,
    -0.000018313507404789202555,
    0.0,
    7.8216286043226273085e-6,
    0.0,
    2.0087542484759945503e-6,
    0.0,
    -3.3532765393185713737e-7,
    0.0,
    -1.4616020917418230926e-7,
];

pub(crate) const RS_C3: [f64; 52] = [
    0.0,
    -0.0026794321814389138085,
    0.0,
    0.029953721091035149637,
    0.0,
    -0.042570172541828697985,
    0.0,
    -0.28997965779803887507,
    0.0,
    0.48888319992354459725,
    0.0,
    1.2308558763957460812,
    0.0,
    -0.82975607085274087042,
    0.0,
    -2.2497635366665668665,
    0.0,
    0.078451399610054713794,
    0.0,
    1.7467492800868894004,
    0.0,
    0.45968080979749935109,
    0.0,
    -0.66193534710397749464,
    0.0,
    -0.31590441036173634579,
    0.0,
    0.12844792545207495989,
    0.0,
    0.10073382716626152301,
    0.0,
    -0.0095301838488252677595,
    0.0,
    -0.019264421687514088898,
    0.0,
    -0.0012464637158769291712,
    0.0,
    0.002424396964110308574,
    0.0,
    0.00043764769774185701828,
    0.0,
    -0.00020714032687001791276,
    0.0,
    -0.000062743445041865155605,
    0.0,
    0.000011575343814595669348,
    0.0,
    5.8838549245403797839e-6,
    0.0,
    -3.1246774006963362209e-7,
    0.0,
    -4.024065775498959501e-7,
];

pub(crate) const RS_C4: [f64; 53] = [
    0.00046483389361763381854,
    0.0,
    -0.0040226429461361883039,
    0.0,
    0.0038471770517961268836,
    0.0,
    0.065811751358094860021,
    0.0,
    -0.19604124343694449118,
    0.0,
    -0.20854053686358853244,
    0.0,
    0.95077541851417509458,
    0.0,
    0.53415353129148739761,
    0.0,
    -1.6763494411763400796,
    0.0,
    -1.0767471578751289928,
    0.0,
    1.2353393016565969853,
    0.0,
    1.0257825340057275772,
    0.0,
    -0.40124095793988544379,
    0.0,
    -0.5036663995108303448,
    0.0,
    0.035734877955027449858,
    0.0,
    0.14431763086785416624,
    0.0,
    0.015091527417903469417,
    0.0,
    -0.026098874779194361318,
    0.0,
    -0.006126628379519261749,
    0.0,
    0.0030775031298708411848,
    0.0,
    0.0011562478934088752316,
    0.0,
    -0.00022775966758472127473,
    0.0,
    -0.00014189637118181444433,
    0.0,
    7.4648603079559194531e-6,
    0.0,
    0.000012479701645409116617,
    0.0,
    4.8639451840020946191e-7,
    0.0,
    -8.2102374141231672339e-7,
];
